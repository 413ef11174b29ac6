"""Painleve II with Airy boundary data and the Tracy-Widom distributions.

``u(x; t)`` solves ``u'' = 2u^3 + x u`` with ``u ~ -sqrt(t) Ai(x)`` as
``x -> +inf``, and ``F(x; t) = exp(-int_x^inf (y - x) u(y; t)^2 dy)``.  We
integrate backwards from ``x_start`` together with

* the variational solution ``v = du/dt`` (``v'' = (6u^2 + x) v``),
* ``I(x) = int_x^inf (y - x) u^2 dy`` through ``I'' = u^2``,
* ``W(x) = dI/dt = int_x^inf (y - x) 2 u v dy`` through ``W'' = 2 u v``,

so ``F = exp(-I)``, ``dF/dt = -F W`` and the second-eigenvalue law is
``F2 = F - dF/dt = F (1 + W)``.  Boundary values of ``I`` and ``W`` at
``x_start`` use the closed-form Airy integrals.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import mpmath
import numpy as np
from scipy.integrate import simpson, solve_ivp

X_START = 8.0
X_END = -8.0
SERIES_RADIUS = 8.0
RTOL = 1e-13
ATOL = 1e-20
TAIL_TOL = 1e-8


class PainleveIntegrationError(RuntimeError):
    """Backward integration stalled before reaching the requested end point."""

    def __init__(self, message: str, x_reached: float):
        super().__init__(f"{message} (reached x = {x_reached:.6g})")
        self.x_reached = x_reached


class UnresolvedTailError(ValueError):
    pass


def _airy_series(x: float, dps: int = 50) -> tuple[float, float]:
    with mpmath.workdps(dps):
        X = mpmath.mpf(x)
        x3 = X**3
        c1 = 1 / (mpmath.power(3, mpmath.mpf(2) / 3) * mpmath.gamma(mpmath.mpf(2) / 3))
        c2 = 1 / (mpmath.power(3, mpmath.mpf(1) / 3) * mpmath.gamma(mpmath.mpf(1) / 3))
        eps = mpmath.mpf(10) ** (-dps)
        f = fp = g = gp = mpmath.mpf(0)
        tf, tfp, tg, tgp = mpmath.mpf(1), X**2 / 2, X, mpmath.mpf(1)
        k = 0
        while True:
            f += tf
            fp += tfp
            g += tg
            gp += tgp
            big = max(abs(tf), abs(tfp), abs(tg), abs(tgp))
            if k > 2 and big < eps:
                break
            tf = tf * x3 / ((3 * k + 2) * (3 * k + 3))
            tfp = tfp * x3 / ((3 * k + 3) * (3 * k + 5))
            tg = tg * x3 / ((3 * k + 3) * (3 * k + 4))
            tgp = tgp * x3 / ((3 * k + 1) * (3 * k + 3))
            k += 1
        return float(c1 * f - c2 * g), float(c1 * fp - c2 * gp)


def _asymptotic_coefficients(count: int) -> list[tuple[float, float]]:
    out = []
    for k in range(count):
        u = math.exp(math.lgamma(3 * k + 0.5) - k * math.log(54) - math.lgamma(k + 1) - math.lgamma(k + 0.5))
        v = -(6 * k + 1) / (6 * k - 1) * u
        out.append((u, v))
    return out


_ASYM = _asymptotic_coefficients(40)


def _airy_asymptotic(x: float) -> tuple[float, float]:
    a = abs(x)
    zeta = 2.0 / 3.0 * a**1.5
    if x > 0:
        su = sv = 0.0
        last = math.inf
        for k, (u, v) in enumerate(_ASYM):
            tu = (-1) ** k * u / zeta**k
            if abs(tu) > last:
                break
            last = abs(tu)
            su += tu
            sv += (-1) ** k * v / zeta**k
        pref = math.exp(-zeta) / (2 * math.sqrt(math.pi))
        return pref * su / a**0.25, -pref * sv * a**0.25
    even_u = odd_u = even_v = odd_v = 0.0
    last = math.inf
    for k in range(len(_ASYM) // 2):
        u0, v0 = _ASYM[2 * k]
        u1, v1 = _ASYM[2 * k + 1]
        size = u0 / zeta ** (2 * k)
        if size > last:
            break
        last = size
        sign = (-1) ** k
        even_u += sign * u0 / zeta ** (2 * k)
        odd_u += sign * u1 / zeta ** (2 * k + 1)
        even_v += sign * v0 / zeta ** (2 * k)
        odd_v += sign * v1 / zeta ** (2 * k + 1)
    phase = zeta + math.pi / 4
    s, c = math.sin(phase), math.cos(phase)
    ai = (s * even_u - c * odd_u) / (math.sqrt(math.pi) * a**0.25)
    aip = -(a**0.25) / math.sqrt(math.pi) * (c * even_v + s * odd_v)
    return ai, aip


def airy_pair(x: float) -> tuple[float, float]:
    """``(Ai(x), Ai'(x))``.

    Power series in 50-digit arithmetic for ``|x| <= 8`` (the series
    cancels heavily for large positive ``x``), asymptotic expansions
    truncated at the smallest term beyond.
    """
    x = float(x)
    if abs(x) <= SERIES_RADIUS:
        return _airy_series(x)
    return _airy_asymptotic(x)


def airy(x: float) -> float:
    return airy_pair(x)[0]


def airy_tail_integrals(x: float) -> tuple[float, float]:
    """``(int_x^inf Ai^2, int_x^inf (y - x) Ai^2)`` in closed form."""
    ai, aip = airy_pair(x)
    first = aip**2 - x * ai**2
    second = (2.0 / 3.0) * x * x * ai**2 - (2.0 / 3.0) * x * aip**2 - ai * aip / 3.0
    return first, second


def _rhs(x, y):
    u, up, v, vp, I, Ip, W, Wp = y
    return [up, 2 * u**3 + x * u, vp, (6 * u * u + x) * v, Ip, u * u, Wp, 2 * u * v]


@dataclass(frozen=True)
class PiiSolution:
    """Backward solution of Painleve II at parameter ``t`` on a decreasing grid.

    ``states`` has one row per ``grid`` point with columns
    ``u, u', v, v', I, I', W, W'``.
    """

    t: float
    x_start: float
    x_end: float
    grid: np.ndarray = field(repr=False)
    states: np.ndarray = field(repr=False)
    dense: object = field(repr=False, compare=False)

    @property
    def u(self) -> np.ndarray:
        return self.states[:, 0]

    @property
    def u_prime(self) -> np.ndarray:
        return self.states[:, 1]

    @property
    def v(self) -> np.ndarray:
        return self.states[:, 2]

    @property
    def v_prime(self) -> np.ndarray:
        return self.states[:, 3]

    def __call__(self, x) -> np.ndarray:
        """State vector(s) at ``x``; shape ``(8,)`` or ``(8, len(x))``."""
        x = np.asarray(x, dtype=float)
        if np.any(x < self.x_end - 1e-12):
            raise ValueError("x below the integrated range")
        out = np.array(self.dense(np.minimum(x, self.x_start)))
        return out

    def log_cdf(self, x) -> np.ndarray:
        """``-I(x)``; beyond ``x_start`` the Airy approximation ``u = -sqrt(t) Ai`` is used."""
        x = np.atleast_1d(np.asarray(x, dtype=float))
        out = np.empty_like(x)
        inside = x <= self.x_start
        if np.any(inside):
            out[inside] = -self(x[inside])[4]
        for i in np.flatnonzero(~inside):
            out[i] = -self.t * airy_tail_integrals(x[i])[1]
        return out

    def w(self, x) -> np.ndarray:
        x = np.atleast_1d(np.asarray(x, dtype=float))
        out = np.empty_like(x)
        inside = x <= self.x_start
        if np.any(inside):
            out[inside] = self(x[inside])[6]
        for i in np.flatnonzero(~inside):
            out[i] = airy_tail_integrals(x[i])[1]
        return out

    def residuals(self, points: Sequence[float] | None = None, delta: float = 5e-3) -> tuple[float, float]:
        """Max ODE residuals ``|u'' - 2u^3 - xu|`` and ``|v'' - (6u^2 + x) v|``.

        Second derivatives come from a fourth-order central difference of the
        interpolated first derivatives, independent of the right-hand side.
        ``v`` grows like ``exp(c |x|^{3/2})`` on the left, so its residual is
        divided by ``1 + |(6u^2 + x) v|``.
        """
        if points is None:
            points = np.linspace(self.x_end + 3 * delta, self.x_start - 3 * delta, 200)
        pts = np.asarray(points, dtype=float)
        offsets = np.array([-2, -1, 1, 2]) * delta
        coeff = np.array([1, -8, 8, -1]) / (12 * delta)
        stencil = np.stack([self(pts + o) for o in offsets])
        upp = np.tensordot(coeff, stencil[:, 1, :], axes=1)
        vpp = np.tensordot(coeff, stencil[:, 3, :], axes=1)
        s = self(pts)
        ru = np.max(np.abs(upp - 2 * s[0] ** 3 - pts * s[0]))
        rhs_v = (6 * s[0] ** 2 + pts) * s[2]
        rv = np.max(np.abs(vpp - rhs_v) / (1 + np.abs(rhs_v)))
        return float(ru), float(rv)


def solve_pii(
    t: float = 1.0,
    x_start: float = X_START,
    x_end: float = X_END,
    rtol: float = RTOL,
    atol: float = ATOL,
    grid_step: float = 0.01,
) -> PiiSolution:
    """Integrate ``u(x; t)`` and its companions from ``x_start`` down to ``x_end``."""
    if not 0 < t <= 1:
        raise ValueError("t must lie in (0, 1]")
    if x_start < 8:
        raise ValueError("x_start must be at least 8 for accurate Airy data")
    if x_end >= x_start:
        raise ValueError("x_end must lie below x_start")
    if t == 1 and x_end < -10:
        raise ValueError("t = 1 integration is only supported down to x = -10")
    ai, aip = airy_pair(x_start)
    j1, j2 = airy_tail_integrals(x_start)
    rt = math.sqrt(t)
    y0 = [-rt * ai, -rt * aip, -ai / (2 * rt), -aip / (2 * rt), t * j2, -t * j1, j2, -j1]
    sol = solve_ivp(
        _rhs, (x_start, x_end), y0, method="DOP853", rtol=rtol, atol=atol, dense_output=True
    )
    if sol.status != 0:
        raise PainleveIntegrationError(sol.message, float(sol.t[-1]))
    count = int(round((x_start - x_end) / grid_step)) + 1
    grid = np.linspace(x_start, x_end, count)
    states = np.asarray(sol.sol(grid)).T
    # Only the t = 1 solution keeps its sign; t < 1 solutions oscillate far left.
    if t == 1 and np.any(states[:, 0] >= 0):
        raise PainleveIntegrationError("solution left the negative branch", float(grid[np.argmax(states[:, 0] >= 0)]))
    return PiiSolution(t, x_start, x_end, grid, states, sol.sol)


def tw_cdf(t: float, grid: Sequence[float], solution: PiiSolution | None = None) -> np.ndarray:
    """``F(x; t)`` on ``grid``."""
    grid = np.asarray(grid, dtype=float)
    if solution is None:
        solution = solve_pii(t, x_end=min(X_END, float(grid.min())))
    elif grid.min() < solution.x_end - 1e-12:
        raise ValueError("solution does not cover the grid")
    return np.exp(solution.log_cdf(grid))


@dataclass(frozen=True)
class CdfTable:
    """``F(x; 1)``, ``dF/dt(x; 1)`` and ``F2(x) = F - dF/dt`` on an increasing grid."""

    grid: np.ndarray = field(repr=False)
    F1: np.ndarray = field(repr=False)
    dFdt: np.ndarray = field(repr=False)

    @property
    def F2(self) -> np.ndarray:
        return self.F1 - self.dFdt


def default_grid(x_min: float = X_END, x_max: float = 6.0, dx: float = 0.01) -> np.ndarray:
    count = int(round((x_max - x_min) / dx)) + 1
    return np.linspace(x_min, x_max, count)


def f2_cdf(grid: Sequence[float] | None = None, solution: PiiSolution | None = None) -> CdfTable:
    """Tracy-Widom first- and second-eigenvalue CDFs via the variational route."""
    grid = default_grid() if grid is None else np.asarray(grid, dtype=float)
    if solution is None:
        solution = solve_pii(1.0, x_end=min(X_END, float(grid.min())))
    if solution.t != 1.0:
        raise ValueError("F2 needs the t = 1 solution")
    F = np.exp(solution.log_cdf(grid))
    return CdfTable(grid, F, -F * solution.w(grid))


def dFdt_finite_difference(grid: Sequence[float], h: float = 1e-3) -> np.ndarray:
    """One-sided ``dF/dt`` at ``t = 1`` from solves at ``t <= 1``.

    Second-order backward differences at steps ``h`` and ``h/2`` combined
    by one Richardson step.
    """
    grid = np.asarray(grid, dtype=float)
    x_end = min(X_END, float(grid.min()))
    values = {s: tw_cdf(1.0 - s, grid, solve_pii(1.0 - s, x_end=x_end)) for s in (0.0, h / 2, h, 2 * h)}

    def backward(step):
        return (3 * values[0.0] - 4 * values[step] + values[2 * step]) / (2 * step)

    return (4 * backward(h / 2) - backward(h)) / 3


def distribution_moments(grid: Sequence[float], cdf: Sequence[float], order: int) -> float:
    """``int x^order dF`` from CDF values on an increasing grid.

    Integration by parts gives ``b^m - m int_a^b x^{m-1} F dx`` once the
    tail masses beyond the grid are negligible, which is enforced.
    """
    x = np.asarray(grid, dtype=float)
    F = np.asarray(cdf, dtype=float)
    if order < 0:
        raise ValueError("order must be nonnegative")
    if F[0] > TAIL_TOL or 1 - F[-1] > TAIL_TOL:
        raise UnresolvedTailError(f"tails unresolved: F(a)={F[0]:.3e}, 1-F(b)={1 - F[-1]:.3e}")
    if order == 0:
        return 1.0
    a, b = x[0], x[-1]
    return float(b**order - order * simpson(x ** (order - 1) * F, x=x))


def mean_variance(grid: Sequence[float], cdf: Sequence[float]) -> tuple[float, float]:
    m1 = distribution_moments(grid, cdf, 1)
    m2 = distribution_moments(grid, cdf, 2)
    return m1, m2 - m1 * m1


def cdf_interpolator(grid: Sequence[float], cdf: Sequence[float]):
    """Vectorised CDF: linear interpolation inside the grid, 0 / 1 outside."""
    x = np.asarray(grid, dtype=float)
    F = np.asarray(cdf, dtype=float)

    def evaluate(points):
        return np.interp(points, x, F, left=0.0, right=1.0)

    return evaluate
