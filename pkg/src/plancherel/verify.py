"""Cross-route identity checks collected into a pass/fail report."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import detform, fredholm

DEFAULT_NS = tuple(range(9))
DEFAULT_LAMBDAS = (0.25, 1.0, 4.0)


@dataclass(frozen=True)
class Check:
    name: str
    params: str
    lhs: float
    rhs: float
    residual: float
    tolerance: float

    @property
    def passed(self) -> bool:
        return bool(self.residual <= self.tolerance)


@dataclass
class VerifyReport:
    checks: list[Check] = field(default_factory=list)

    def add(self, name: str, params: str, lhs: float, rhs: float, tolerance: float, residual: float | None = None):
        res = abs(lhs - rhs) if residual is None else residual
        check = Check(name, params, float(lhs), float(rhs), float(res), float(tolerance))
        self.checks.append(check)
        return check

    @property
    def failures(self) -> list[Check]:
        return [c for c in self.checks if not c.passed]

    @property
    def ok(self) -> bool:
        return not self.failures

    def summary(self) -> dict[str, int]:
        return {"total": len(self.checks), "passed": len(self.checks) - len(self.failures), "failed": len(self.failures)}


def run_verify(
    ns=DEFAULT_NS,
    lambdas=DEFAULT_LAMBDAS,
    scale: float = 1.0,
    tol_override: float | None = None,
) -> VerifyReport:
    """Run every identity on the ``(n, lambda)`` grid.

    ``scale`` multiplies the integrable kernel in the Fredholm routes; any
    value other than 1 should make the Fredholm rows fail.
    """
    report = VerifyReport()

    def tol(value):
        return value if tol_override is None else tol_override

    for lam in lambdas:
        for n in ns:
            p = f"n={n};lambda={lam:g}"
            toe = detform.phi1_toeplitz(n, lam)
            ser1 = detform.phi_series(1, n, lam)
            report.add("phi1_toeplitz_vs_series", p, toe, ser1.value, tol(1e-10 + ser1.tail))
            fd = fredholm.phi1_fredholm(n, lam, scale=scale)
            report.add("phi1_fredholm_vs_toeplitz", p, fd, toe, tol(1e-9))

            n1 = n + 1
            p2 = f"n+1={n1};lambda={lam:g}"
            ser2 = detform.phi_series(2, n1, lam)
            inter = detform.phi2_intermediate(n1, lam)
            if scale == 1.0:
                fred = fredholm.phi2_fredholm(n1, lam)
                fred_fd = fredholm.phi2_fredholm_fd(n1, lam)
            else:
                fred = _phi2_scaled(n, lam, scale)
                fred_fd = fred
            report.add("phi2_fredholm_vs_intermediate", p2, fred, inter, tol(1e-8))
            report.add("phi2_fredholm_vs_series", p2, fred, ser2.value, tol(1e-8 + ser2.tail))
            report.add("phi2_intermediate_vs_series", p2, inter, ser2.value, tol(1e-8 + ser2.tail))
            report.add("phi2_trace_vs_finite_difference", p2, fred, fred_fd, tol(1e-6))
            report.add("phi2_dominates_phi1", p2, inter, detform.phi1_toeplitz(n1, lam), tol(1e-10),
                       residual=max(0.0, detform.phi1_toeplitz(n1, lam) - inter))

        p = f"n=0;lambda={lam:g}"
        trace_side = 1 + 0.5 * fredholm.resolvent_trace(fredholm.KernelSpec(0, lam, 1.0, scale))
        a0_side = detform.phi2_intermediate_bracket(1, lam)
        closed = fredholm.closed_form_n0_trace(lam)
        report.add("n0_trace_vs_a0_sum", p, trace_side, a0_side, tol(1e-9))
        report.add("n0_trace_vs_closed_form", p, trace_side, closed, tol(1e-9))
        report.add("n0_a0_sum_vs_closed_form", p, a0_side, closed, tol(1e-9))

    for n in range(11):
        p = f"n={n};lambda=0"
        det0 = fredholm.fredholm_det(fredholm.KernelSpec(n, 0.0, 1.0, scale), gate=scale == 1.0)
        report.add("lambda0_det_power_of_two", p, det0, 2.0**n, tol(1e-10))
        spec0 = fredholm.spectrum(fredholm.KernelSpec(n, 0.0, 1.0, scale))
        report.add("lambda0_kernel_of_K_plus_1", p, spec0.near_minus_one, n, 0.0)

    for lam in lambdas:
        for n in ns:
            p = f"n={n};lambda={lam:g}"
            sp = fredholm.spectrum(fredholm.KernelSpec(n, lam, 1.0, scale))
            report.add("spectrum_lower_bound", p, sp.min, -1.0, tol(1e-8), residual=max(0.0, -1.0 - sp.min))
            gap = 1.0 - sp.max
            report.add("spectrum_gap_below_1", p, sp.max, 1.0, 0.0, residual=0.0 if gap > 1e-6 else 1.0 - gap)

    for lam in (1.0, 4.0):
        for k in range(9):
            p = f"k={k};lambda={lam:g}"
            ratio = 2 * fredholm.fredholm_det(fredholm.KernelSpec(k, lam, 1.0, scale)) / fredholm.fredholm_det(
                fredholm.KernelSpec(k + 1, lam, 1.0, scale)
            )
            report.add("det_ratio_vs_kappa", p, ratio, detform.ortho_poly(k, lam).kappa2, tol(1e-8))
            if scale == 1.0 and k < 6:
                report.add("m11_log_derivative_vs_kappa_sum", p, fredholm.log_derivative_m11(k, lam),
                           fredholm.kappa_projection_sum(k, lam), tol(1e-8))

    for t in (0.25, 1.0):
        p = f"p=20;lambda=1;t={t:g}"
        spec = fredholm.KernelSpec(20, 1.0, t, scale)
        val = (1 + math.sqrt(t)) ** -20 * fredholm.fredholm_det(spec)
        report.add("szego_limit", p, val, 1.0, tol(1e-8))

    for lam in (0.5, 1.0, 4.0):
        for n in range(1, 11):
            p = f"n={n};lambda={lam:g}"
            res = detform.toeplitz_inverse_identity(n, lam)
            report.add("toeplitz_inverse_border", p, res, 0.0, tol(1e-10), residual=res)

    for lam in (1.0, 2.0):
        for n in range(1, 6):
            p = f"n={n};lambda={lam:g}"
            res = fredholm.telescoping_residual(n, lam)
            report.add("telescoping_identity", p, res, 0.0, tol(1e-9), residual=res)

    return report


def _phi2_scaled(n: int, lam: float, scale: float) -> float:
    spec = fredholm.KernelSpec(n, lam, 1.0, scale)
    p1 = 2.0**-n * fredholm.fredholm_det(spec, gate=False)
    nm = fredholm.NystromMatrix.build(spec)
    A = nm.matrix
    tr = np.trace(np.linalg.solve(np.eye(nm.m) - A, A)).real
    return p1 * (1 + n / 4 + 0.5 * tr)
