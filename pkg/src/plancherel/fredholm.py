"""Fredholm determinants of the integrable kernel ``K_n`` on the unit circle.

``K_n(z, w) = (z^{-n} w^n - phi(z)/phi(w)) / (2 pi i (z - w))`` with
``phi(z) = exp(sqrt(lam) (z - 1/z))``, acting by ``int K_n(z, w) f(w) dw``.
The operator is discretised by the periodic trapezoid rule with complex
contour weights ``i z_k 2pi/m``.  Because ``K_n(z, w) i w`` is a Hermitian
kernel in ``(z, w)``, the resulting Nystrom matrix is Hermitian, which makes
the determinants real and the spectra computable with ``eigvalsh``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import linalg

from . import detform

DIAGONAL_EPS = 1e-8
CONVERGENCE_TOL = 1e-10
IMAG_TOL = 1e-10


class DiscretizationError(RuntimeError):
    """The Nystrom discretisation failed a convergence or reality check."""


@dataclass(frozen=True)
class KernelSpec:
    """Parameters of ``sqrt(t) K_n`` at Poisson parameter ``lam``.

    ``scale`` multiplies the kernel; it is 1 except in sensitivity tests.
    """

    n: int
    lam: float
    t: float = 1.0
    scale: float = 1.0

    def __post_init__(self):
        if self.n < 0:
            raise ValueError("n must be nonnegative")
        if self.lam < 0:
            raise ValueError("lambda must be nonnegative")
        if not 0 < self.t <= 1.0:
            raise ValueError("t must lie in (0, 1]")


def default_nodes(n: int, lam: float) -> int:
    return max(64, 4 * math.ceil(n + 2 * math.sqrt(lam)))


def phi(z, lam: float):
    return np.exp(math.sqrt(lam) * (z - 1.0 / z))


def psi(z, lam: float):
    """``exp(sqrt(lam) (z + 1/z))``; equals ``exp(2 sqrt(lam) cos(theta))`` on the circle."""
    return np.exp(math.sqrt(lam) * (z + 1.0 / z))


def kernel_eval(spec: KernelSpec, z, w):
    """``K_n(z, w)`` for points on the unit circle (broadcasting).

    Near the diagonal the limit ``-(n/z + sqrt(lam)(1 + z^{-2})) / (2 pi i)``
    is used.
    """
    z = np.asarray(z, dtype=complex)
    w = np.asarray(w, dtype=complex)
    z, w = np.broadcast_arrays(z, w)
    n, rl = spec.n, math.sqrt(spec.lam)
    diff = z - w
    near = np.abs(diff) < DIAGONAL_EPS
    safe = np.where(near, 1.0, diff)
    num = z ** (-n) * w**n - phi(z, spec.lam) / phi(w, spec.lam)
    off = num / (2j * math.pi * safe)
    diag = -(n / z + rl * (1.0 + z ** (-2))) / (2j * math.pi)
    return spec.scale * np.where(near, diag, off)


def hermitian_kernel(spec: KernelSpec, z, w):
    """``|dw|`` form of the kernel: ``K_n(z, w) dw = H(z, w) dtheta``.

    Written with conjugates so that ``H(w, z) = conj(H(z, w))`` is manifest:
    ``(conj(z)^n w^n - conj(1/phi(z)) / phi(w)) / (2 pi (conj(1/z)/w - 1))``.
    """
    z = np.asarray(z, dtype=complex)
    w = np.asarray(w, dtype=complex)
    z, w = np.broadcast_arrays(z, w)
    n, rl = spec.n, math.sqrt(spec.lam)
    den = np.conj(1.0 / z) / w - 1.0
    near = np.abs(den) < DIAGONAL_EPS
    safe = np.where(near, 1.0, den)
    num = np.conj(z) ** n * w**n - np.conj(1.0 / phi(z, spec.lam)) / phi(w, spec.lam)
    off = num / (2 * math.pi * safe)
    diag = -(n + rl * (z + 1.0 / z)) / (2 * math.pi)
    return spec.scale * np.where(near, diag, off)


@dataclass(frozen=True)
class NystromMatrix:
    """Trapezoid discretisation of ``K_n`` on ``m`` equispaced circle nodes."""

    spec: KernelSpec
    m: int
    nodes: np.ndarray = field(repr=False)
    matrix: np.ndarray = field(repr=False)

    @classmethod
    def build(cls, spec: KernelSpec, m: int | None = None) -> "NystromMatrix":
        m = default_nodes(spec.n, spec.lam) if m is None else int(m)
        if m < 16 or m % 2:
            raise ValueError("node count must be even and at least 16")
        theta = 2 * math.pi * np.arange(m) / m
        nodes = np.exp(1j * theta)
        weights = 1j * nodes * (2 * math.pi / m)
        A = kernel_eval(spec, nodes[:, None], nodes[None, :]) * weights[None, :]
        return cls(spec, m, nodes, A)

    def operator(self) -> np.ndarray:
        """``sqrt(t) A``."""
        return math.sqrt(self.spec.t) * self.matrix

    def hermitian(self) -> np.ndarray:
        """The same matrix with rounding asymmetry removed."""
        A = self.matrix
        return 0.5 * (A + A.conj().T)


def _det_at(spec: KernelSpec, m: int) -> complex:
    A = NystromMatrix.build(spec, m).operator()
    sign, logdet = np.linalg.slogdet(np.eye(m) - A)
    return complex(sign * np.exp(logdet))


@dataclass(frozen=True)
class DetResult:
    value: float
    m: int
    refined: float
    imag: float

    @property
    def change(self) -> float:
        return abs(self.refined - self.value)


def fredholm_det_report(
    spec: KernelSpec, m: int | None = None, gate: bool = True, tol: float = CONVERGENCE_TOL
) -> DetResult:
    """``det(I - sqrt(t) K_n)`` at ``m`` nodes together with the ``2m`` value.

    Raises :class:`DiscretizationError` when the imaginary part is not
    negligible, when the determinant is not positive, or (with ``gate``) when
    doubling the node count moves the value by more than
    ``tol * max(1, |det|)``.
    """
    m = default_nodes(spec.n, spec.lam) if m is None else int(m)
    d = _det_at(spec, m)
    if abs(d.imag) > IMAG_TOL * (1 + abs(d.real)):
        raise DiscretizationError(f"determinant has imaginary part {d.imag:.3e}")
    refined = _det_at(spec, 2 * m).real if gate else d.real
    res = DetResult(d.real, m, refined, d.imag)
    if gate and res.change > tol * max(1.0, abs(d.real)):
        raise DiscretizationError(f"node doubling changed det by {res.change:.3e} at m={m}")
    if spec.scale == 1.0 and not d.real > 0:
        raise DiscretizationError(f"nonpositive determinant {d.real!r}")
    return res


def fredholm_det(spec: KernelSpec, m: int | None = None, gate: bool = True) -> float:
    return fredholm_det_report(spec, m, gate).value


def phi1_fredholm(n: int, lam: float, m: int | None = None, scale: float = 1.0) -> float:
    """``2^{-n} det(I - K_n)``."""
    return 2.0**-n * fredholm_det(KernelSpec(n, lam, 1.0, scale), m)


def resolvent_trace(spec: KernelSpec, m: int | None = None) -> float:
    """``tr((I - sqrt(t) K_n)^{-1} K_n)`` of the discretised operator."""
    nm = NystromMatrix.build(spec, m)
    A = nm.matrix
    try:
        X = linalg.solve(np.eye(nm.m) - math.sqrt(spec.t) * A, A)
    except linalg.LinAlgError as exc:
        raise DiscretizationError("resolvent solve failed") from exc
    tr = np.trace(X)
    if abs(tr.imag) > IMAG_TOL * (1 + abs(tr.real)):
        raise DiscretizationError(f"trace has imaginary part {tr.imag:.3e}")
    return float(tr.real)


def phi2_fredholm(n_plus_1: int, lam: float, m: int | None = None) -> float:
    """``phi^(2)_{n+1}(lam)`` from the t-derivative of ``(1+sqrt t)^{-n} det(I - sqrt t K_n)``.

    Since ``d/dt log det(I - sqrt(t) K) = -tr((I - sqrt(t) K)^{-1} K) / (2 sqrt t)``,
    the derivative at ``t = 1`` is exact:
    ``phi^(1)_n (1 + n/4 + tr((I - K_n)^{-1} K_n) / 2)``.
    """
    if n_plus_1 < 1:
        raise ValueError("n_plus_1 must be positive")
    n = n_plus_1 - 1
    if lam == 0:
        return 1.0
    spec = KernelSpec(n, lam)
    p1 = 2.0**-n * fredholm_det(spec, m)
    return p1 * (1.0 + n / 4.0 + 0.5 * resolvent_trace(spec, m))


def _scaled_det(n: int, lam: float, t: float, m: int | None) -> float:
    return (1 + math.sqrt(t)) ** -n * fredholm_det(KernelSpec(n, lam, t), m)


def _scaled_det_raw(n: int, lam: float, t: float, m: int | None) -> float:
    # t slightly above 1 is allowed here; the spectrum stays below 1 with margin.
    A = NystromMatrix.build(KernelSpec(n, lam), m).matrix
    sign, logdet = np.linalg.slogdet(np.eye(A.shape[0]) - math.sqrt(t) * A)
    return (1 + math.sqrt(t)) ** -n * float((sign * np.exp(logdet)).real)


def phi2_fredholm_fd(n_plus_1: int, lam: float, m: int | None = None, h: float = 1e-4) -> float:
    """Same quantity as :func:`phi2_fredholm` via central differences in ``t``
    with one Richardson step."""
    n = n_plus_1 - 1
    if lam == 0:
        return 1.0

    def central(step):
        return (_scaled_det_raw(n, lam, 1 + step, m) - _scaled_det_raw(n, lam, 1 - step, m)) / (2 * step)

    deriv = (4 * central(h / 2) - central(h)) / 3
    return _scaled_det_raw(n, lam, 1.0, m) - deriv


def m11_at_zero(k: int, lam: float, t: float = 1.0, m: int | None = None) -> float:
    """``(1 + sqrt t) det(I - sqrt t K_{k-1}) / det(I - sqrt t K_k)`` for ``k >= 1``."""
    if k < 1:
        raise ValueError("k must be positive")
    num = fredholm_det(KernelSpec(k - 1, lam, t), m)
    den = fredholm_det(KernelSpec(k, lam, t), m)
    return (1 + math.sqrt(t)) * num / den


def det_ratio_identity(k: int, lam: float, t: float = 1.0, m: int | None = None) -> float:
    """``|m11(0; k+1; 1) - kappa_k^2|`` with ``m11`` from determinant ratios.

    Only ``t = 1`` has an independent reference value.
    """
    if t != 1.0:
        raise ValueError("the kappa reference exists only at t = 1")
    if k < 0:
        raise ValueError("k must be nonnegative")
    ratio = m11_at_zero(k + 1, lam, 1.0, m)
    kappa2 = detform.ortho_poly(k, lam).kappa2 if lam > 0 else 1.0
    return abs(ratio - kappa2)


def szego_limit_check(lam: float, t: float, p_list, m: int | None = None) -> list[float]:
    """``(1 + sqrt t)^{-p} det(I - sqrt t K_p)`` for each ``p``."""
    return [_scaled_det(int(p), lam, t, m) for p in p_list]


def product_form_residual(n: int, lam: float, t: float, p_max: int, m: int | None = None) -> float:
    """Residual of the truncated infinite product of ``m11(0; k+1; t)``.

    ``prod_{k=n}^{p_max-1} m11(0; k+1; t)`` approximates
    ``(1+sqrt t)^{-n} det(I - sqrt t K_n)`` once the scaled determinant at
    ``p_max`` is close to 1.
    """
    prod = 1.0
    for k in range(n, p_max):
        prod *= m11_at_zero(k + 1, lam, t, m)
    return abs(prod - _scaled_det(n, lam, t, m))


def log_derivative_m11(k: int, lam: float, m: int | None = None) -> float:
    """``-d/dt log m11(0; k+1; t)`` at ``t = 1`` from resolvent traces.

    Differentiating ``(1+sqrt t) det(I - sqrt t K_k) / det(I - sqrt t K_{k+1})``
    gives ``-1/4 + (tr_k - tr_{k+1}) / 2`` with
    ``tr_j = tr((I - K_j)^{-1} K_j)``.
    """
    tr_k = resolvent_trace(KernelSpec(k, lam), m)
    tr_k1 = resolvent_trace(KernelSpec(k + 1, lam), m)
    return -0.25 + 0.5 * (tr_k - tr_k1)


def kappa_projection_sum(k: int, lam: float) -> float:
    """``sum_s lam^s/(s!)^2 kappa_k^2 (sum_p eta^k_p a_{p+1}(s))^2``."""
    op = detform.ortho_poly(k, lam)
    s_max = detform.s_cutoff(lam)
    table = detform.coefficient_table(lam, s_max, k + 1)
    weights = np.array([detform.s_weight(s, lam) for s in range(s_max + 1)])
    proj = table.values[:, 1 : k + 2] @ op.eta
    return float(op.kappa2 * np.dot(weights, proj**2))


def telescoping_residual(n: int, lam: float) -> float:
    """``|sum_{k<n} kappa_projection_sum(k) - sum_s lam^s/(s!)^2 <T_{n-1}^{-1} b_n(s), b_n(s)>|``."""
    if n < 1:
        raise ValueError("n must be positive")
    lhs = sum(kappa_projection_sum(k, lam) for k in range(n))
    rhs = detform.intermediate_quadratic_sum(n, lam)
    return abs(lhs - rhs)


@dataclass(frozen=True)
class SpectrumReport:
    eigenvalues: np.ndarray = field(repr=False)
    near_minus_one: int
    near_plus_one: int
    tol: float

    @property
    def max(self) -> float:
        return float(self.eigenvalues[-1])

    @property
    def min(self) -> float:
        return float(self.eigenvalues[0])


def spectrum(spec: KernelSpec, m: int | None = None, tol: float = 1e-6) -> SpectrumReport:
    """Eigenvalues of the Hermitian ``|dw|`` discretisation, ascending."""
    m = default_nodes(spec.n, spec.lam) if m is None else int(m)
    theta = 2 * math.pi * np.arange(m) / m
    nodes = np.exp(1j * theta)
    H = hermitian_kernel(spec, nodes[:, None], nodes[None, :]) * (2 * math.pi / m)
    H = 0.5 * (H + H.conj().T)
    ev = np.linalg.eigvalsh(H)
    return SpectrumReport(
        ev,
        int(np.sum(np.abs(ev + 1) < tol)),
        int(np.sum(np.abs(ev - 1) < tol)),
        tol,
    )


def closed_form_n0_trace(lam: float) -> float:
    """``1 + sum_p lam^p/(p!)^2 binom(2p-2, p-1)``, the value of ``1 + tr/2`` at ``n = 0``."""
    total = 1.0
    p = 1
    while True:
        term = math.exp(p * math.log(lam) - 2 * math.lgamma(p + 1)) * math.comb(2 * p - 2, p - 1) if lam > 0 else 0.0
        total += term
        if term < 1e-18 * total and p > 4 * lam + 2:
            return total
        p += 1
