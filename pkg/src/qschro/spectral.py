"""Finite-interval shooting spectra and the null-space growth probe.

The characteristic function D(lambda) is the right boundary form evaluated
on the unique (up to scale) solution satisfying the left condition; its
zeros are the eigenvalues of the restriction with separated quasi-boundary
conditions.  Because solutions can traverse many orders of magnitude, D
only vanishes *relative to the cancellation scale of the shot*, and every
acceptance test is phrased that way.

The probe integrates the adjoint equation's fundamental pair over growing
symmetric windows and tracks the smallest eigenvalue N(T) of their L2
Gram matrix.  Unbounded N(T) means no normalized combination stays
square-integrable: desk-scale evidence that the adjoint null space is
trivial, which is what the uniqueness theorems assert under their
hypotheses.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import config
from .coeffs import CoefficientField
from .errors import OverflowUnrecoverableError
from .propagate import Trajectory, fundamental, integrate, pair_integral
from .quasi import ADJOINT, DIRECT, QuasiState, apply_l, assemble


@dataclass(frozen=True)
class BoundaryCondition:
    """Separated conditions alpha*y0 + beta*y1 = 0 in quasi-derivative terms.

    y1 is the first quasi-derivative, not u': u' need not exist at an
    endpoint that carries a coefficient jump.  Dirichlet is (1, 0).
    """

    left: tuple[complex, complex] = (1.0, 0.0)
    right: tuple[complex, complex] = (1.0, 0.0)

    def __post_init__(self):
        for name, (al, be) in (("left", self.left), ("right", self.right)):
            if al == 0 and be == 0:
                raise ValueError(f"{name} boundary pair must not be (0, 0)")

    @classmethod
    def dirichlet(cls) -> "BoundaryCondition":
        return cls((1.0, 0.0), (1.0, 0.0))


@dataclass(frozen=True)
class CharValue:
    """Shooting discriminant with its scale bookkeeping."""

    value: complex  # mantissa; true D = value * exp(logscale)
    logscale: float
    log_sup: float  # log of sup |Y| along the shot

    @property
    def residual(self) -> float:
        """|D| relative to the cancellation scale of the shot."""
        return abs(self.value) * math.exp(self.logscale - self.log_sup)


@dataclass
class EigenResult:
    lam: complex
    residual: float
    iterations: int
    converged: bool
    trajectory: Trajectory | None = None
    message: str = ""


@dataclass
class ProbeReport:
    """Window-growth analysis of the adjoint equation's solution pair.

    log_N[k] is log of the smallest Gram eigenvalue on [-T_k, T_k];
    N values are also given where representable.  classification is
    "grows" / "bounded" / "inconclusive" per the configured margins.
    """

    lam: complex
    windows: tuple
    log_N: tuple
    N: tuple
    classification: str
    monotone: bool
    growth_total: float = 0.0
    tail_ratio: float = 1.0
    notes: tuple = ()


def characteristic(
    c: CoefficientField,
    interval: tuple[float, float],
    bc: BoundaryCondition,
    lam: complex,
    side: str = DIRECT,
    tol: tuple[float, float] = (config.ATOL, config.RTOL),
) -> CharValue:
    """Shoot from the left condition and evaluate the right one."""
    a, b = float(interval[0]), float(interval[1])
    al, be = bc.left
    init = QuasiState(x=a, y0=-be, y1=al, side=side)
    sys = assemble(c, side, lam)
    traj = integrate(sys, init, b, tol)
    end = traj.state_at(b)
    ar, br = bc.right
    D = ar * end.y0 + br * end.y1
    return CharValue(value=D, logscale=end.logscale, log_sup=traj.log_sup())


def _shoot(c, interval, bc, lam, side, tol):
    a, b = float(interval[0]), float(interval[1])
    al, be = bc.left
    init = QuasiState(x=a, y0=-be, y1=al, side=side)
    sys = assemble(c, side, lam)
    return integrate(sys, init, b, tol)


def eigenvalues(
    c: CoefficientField,
    interval: tuple[float, float],
    bc: BoundaryCondition,
    scan: tuple[float, float] | None = None,
    seeds=(),
    grid: int = 120,
    side: str = DIRECT,
    tol: tuple[float, float] = (config.ATOL, config.RTOL),
    char_tol: float = config.CHAR_TOL,
) -> list[EigenResult]:
    """Locate eigenvalues by real-interval scan or complex Newton seeds.

    Scan mode brackets sign changes of Re D on a real grid and bisects:
    valid when D is real along the scan (formally symmetric data).
    Newton mode iterates lambda - D/D' with a centered finite-difference
    derivative from each seed; non-converged seeds are reported with
    converged=False, never raised.  Duplicates merge within 1e-8.
    """
    results: list[EigenResult] = []
    if scan is not None:
        lo, hi = float(scan[0]), float(scan[1])
        lams = np.linspace(lo, hi, grid)
        vals = [characteristic(c, interval, bc, float(t), side, tol) for t in lams]
        signs = [math.copysign(1.0, v.value.real) if v.value.real != 0 else 0.0 for v in vals]
        for i in range(len(lams) - 1):
            if signs[i] == 0.0:
                continue
            if signs[i] * signs[i + 1] < 0:
                res = _bisect_real(c, interval, bc, float(lams[i]), float(lams[i + 1]), side, tol, char_tol)
                results.append(res)
    for seed in seeds:
        results.append(_newton(c, interval, bc, complex(seed), side, tol, char_tol))
    merged: list[EigenResult] = []
    for r in sorted(results, key=lambda t: (t.lam.real, t.lam.imag)):
        dup = next(
            (
                m
                for m in merged
                if m.converged == r.converged
                and abs(m.lam - r.lam) <= config.EIG_MERGE_TOL * (1 + abs(r.lam))
            ),
            None,
        )
        if dup is None:
            merged.append(r)
    return merged


def _bisect_real(c, interval, bc, lo, hi, side, tol, char_tol):
    flo = characteristic(c, interval, bc, lo, side, tol).value.real
    it = 0
    for it in range(1, 80):
        mid = 0.5 * (lo + hi)
        fm = characteristic(c, interval, bc, mid, side, tol).value.real
        if fm == 0.0:
            lo = hi = mid
            break
        if math.copysign(1.0, fm) == math.copysign(1.0, flo):
            lo = mid
            flo = fm
        else:
            hi = mid
        if hi - lo <= 5e-15 * (1 + abs(mid)):
            break
    lam = 0.5 * (lo + hi)
    cv = characteristic(c, interval, bc, lam, side, tol)
    traj = _shoot(c, interval, bc, lam, side, tol)
    # a collapsed bracket around a confirmed sign change is convergence for
    # bisection even when the shot is too lambda-sensitive to push the
    # characteristic residual below char_tol in double precision
    bracket_done = hi - lo <= 1e-12 * (1 + abs(lam))
    return EigenResult(
        lam=complex(lam),
        residual=cv.residual,
        iterations=it,
        converged=bracket_done or cv.residual <= char_tol,
        trajectory=traj,
    )


def _newton(c, interval, bc, seed, side, tol, char_tol):
    lam = complex(seed)
    for it in range(1, config.NEWTON_MAX_ITER + 1):
        cv = characteristic(c, interval, bc, lam, side, tol)
        if cv.residual <= char_tol:
            return EigenResult(
                lam=lam,
                residual=cv.residual,
                iterations=it,
                converged=True,
                trajectory=_shoot(c, interval, bc, lam, side, tol),
            )
        h = config.NEWTON_FD_STEP * (1 + abs(lam))
        cp = characteristic(c, interval, bc, lam + h, side, tol)
        cm = characteristic(c, interval, bc, lam - h, side, tol)
        # combine at a common scale; nearby lambdas give nearby logscales
        L = max(cp.logscale, cm.logscale, cv.logscale)
        dp = cp.value * math.exp(cp.logscale - L)
        dm = cm.value * math.exp(cm.logscale - L)
        d0 = cv.value * math.exp(cv.logscale - L)
        deriv = (dp - dm) / (2 * h)
        if deriv == 0:
            return EigenResult(
                lam=lam, residual=cv.residual, iterations=it, converged=False,
                message="flat characteristic (zero derivative)",
            )
        step = d0 / deriv
        lam = lam - step
        if abs(step) <= 1e-14 * (1 + abs(lam)):
            cv = characteristic(c, interval, bc, lam, side, tol)
            return EigenResult(
                lam=lam,
                residual=cv.residual,
                iterations=it,
                converged=cv.residual <= char_tol,
                trajectory=_shoot(c, interval, bc, lam, side, tol),
                message="" if cv.residual <= char_tol else "stagnated above tolerance",
            )
    cv = characteristic(c, interval, bc, lam, side, tol)
    return EigenResult(
        lam=lam,
        residual=cv.residual,
        iterations=config.NEWTON_MAX_ITER,
        converged=False,
        message="no convergence within iteration budget",
    )


def eigenfunction_residual(
    c: CoefficientField,
    result: EigenResult,
    interval: tuple[float, float],
    side: str = DIRECT,
) -> float:
    """Relative L2 residual of the re-fitted eigenfunction.

    Re-fits the dense output as a piecewise polynomial, applies the
    expression exactly, and compares with lambda times the eigenfunction.
    """
    if result.trajectory is None:
        raise ValueError("eigenvalue result carries no trajectory")
    a, b = float(interval[0]), float(interval[1])
    u = result.trajectory.to_piecewise(0, a, b)
    lu = apply_l(c, side, u, (a, b))
    diff = lu - result.lam * u
    num = (diff * diff.conj()).integrate(a, b).real
    den = (u * u.conj()).integrate(a, b).real
    return math.sqrt(max(num, 0.0) / den) / (1 + abs(result.lam))


# ----------------------------------------------------------------------
# null-space probe


def default_windows(tmax: float, count: int = 9) -> tuple:
    """Geometric window ladder ending at tmax (T0 = tmax / 2^(count-1))."""
    return tuple(tmax * 0.5 ** k for k in range(count - 1, -1, -1))


def null_probe(
    c: CoefficientField,
    lam: complex = 0.0,
    tmax: float = 40.0,
    windows=None,
    tol: tuple[float, float] = (config.ATOL, config.RTOL),
) -> ProbeReport:
    """Growth analysis of the adjoint solution pair: evidence for def = 0.

    Builds the fundamental system of the adjoint equation at conj(lambda)
    anchored at 0 and computes N(T), the smallest eigenvalue of the 2x2
    L2(-T, T) Gram matrix.  "grows" (no normalized null combination stays
    in L2 on the horizon) needs N(Tmax) >= 100 * N(T0) with a monotone
    trend; "bounded" needs saturation within 1 percent.  For problems
    without accretivity evidence the verdict is exploratory.
    """
    if not lam.real < 1.0:
        raise ValueError("probe expects Re lambda < 1 (normalized setting)")
    if tmax < 10.0:
        raise ValueError("probe horizon must be at least 10")
    windows = tuple(sorted(windows)) if windows else default_windows(tmax)
    if windows[-1] > tmax:
        raise ValueError("windows exceed tmax")
    sys = assemble(c, ADJOINT, complex(lam).conjugate())
    fs = fundamental(sys, 0.0, (-tmax, tmax), tol)
    log_N = []
    n_vals = []
    for T in windows:
        g11, l11 = pair_integral(fs.y1, fs.y1, -T, T)
        g22, l22 = pair_integral(fs.y2, fs.y2, -T, T)
        g12, l12 = pair_integral(fs.y1, fs.y2, -T, T)
        L = max(l11, l22, l12)
        M = np.array(
            [
                [g11 * math.exp(l11 - L), (g12 * math.exp(l12 - L)).conjugate()],
                [g12 * math.exp(l12 - L), g22 * math.exp(l22 - L)],
            ],
            dtype=complex,
        )
        M = 0.5 * (M + M.conj().T)
        eigs = np.linalg.eigvalsh(M)
        nmin = float(eigs[0])
        if not np.isfinite(nmin):
            raise OverflowUnrecoverableError(
                f"Gram renormalization failed on window T={T}"
            )
        if nmin <= 0:
            log_N.append(-math.inf)
            n_vals.append(0.0)
            continue
        log_N.append(math.log(nmin) + L)
        n_vals.append(nmin * math.exp(L) if abs(math.log(nmin) + L) < 700 else math.inf)
    monotone = all(
        b >= a - 1e-9 * max(1.0, abs(a)) for a, b in zip(log_N[:-1], log_N[1:])
    )
    notes = []
    growth = log_N[-1] - log_N[0]
    tail_ratio = math.exp(log_N[-1] - log_N[-2]) if len(log_N) >= 2 else math.inf
    last_increment = 1.0 - math.exp(log_N[-2] - log_N[-1]) if len(log_N) >= 2 else 1.0
    if last_increment <= config.PROBE_SATURATION_FRACTION:
        cls = "bounded"
        notes.append("Gram mass saturates: an L2 null direction is not excluded")
    elif (
        monotone
        and growth >= math.log(config.PROBE_GROWTH_FACTOR)
        and tail_ratio >= 1.0 + config.PROBE_SUSTAINED_MIN
    ):
        # total growth alone is not enough: a deep ladder always grows out
        # of its smallest windows, so the outermost doubling must still add
        # mass for the "grows" call
        cls = "grows"
        notes.append(
            "no unit-norm combination of the solution pair stays bounded in L2"
        )
    else:
        cls = "inconclusive"
    return ProbeReport(
        lam=complex(lam),
        windows=windows,
        log_N=tuple(log_N),
        N=tuple(n_vals),
        classification=cls,
        monotone=monotone,
        growth_total=growth,
        tail_ratio=tail_ratio,
        notes=tuple(notes),
    )
