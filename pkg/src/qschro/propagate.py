"""Adaptive propagation of the first-order system across coefficient jumps.

A Dormand-Prince 5(4) pair integrates Y' = A(x; lambda) Y between
consecutive coefficient breakpoints; each breakpoint is a hard mesh node
and the state (y0, y1) passes through unchanged, which is exactly the
absolute continuity the quasi-derivative buys.  Every accepted step keeps
a quartic interpolant, so trajectories have dense output; states growing
past 1e100 are renormalized and the exponent ledger travels with the step
records.
"""

from __future__ import annotations

import bisect
import math
from dataclasses import dataclass, field as dc_field

import numpy as np

from .config import ATOL, MIN_STEP_FRACTION, RESCALE_THRESHOLD, RTOL
from .coeffs import PiecewisePoly
from .errors import StepUnderflowError
from .quasi import QuasiState, ShinZettlSystem

# Dormand-Prince 5(4) tableau
_C = (0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0)
_A = (
    (),
    (1 / 5,),
    (3 / 40, 9 / 40),
    (44 / 45, -56 / 15, 32 / 9),
    (19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729),
    (9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656),
)
_B = (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84)
_E = (71 / 57600, 0.0, -71 / 16695, 71 / 1920, -17253 / 339200, 22 / 525, -1 / 40)
# Shampine's quartic dense-output matrix (theta polynomial degrees 1..4)
_P = np.array(
    [
        [1.0, -8048581381 / 2820520608, 8663915743 / 2820520608, -12715105075 / 11282082432],
        [0.0, 0.0, 0.0, 0.0],
        [0.0, 131558114200 / 32700410799, -68118460800 / 10900136933, 87487479700 / 32700410799],
        [0.0, -1754552775 / 470086768, 14199869525 / 1410260304, -10690763975 / 1880347072],
        [0.0, 127303824393 / 49829197408, -318862633887 / 49829197408, 701980252875 / 199316789632],
        [0.0, -282668133 / 205662961, 2019193451 / 616988883, -1453857185 / 822651844],
        [0.0, 40617522 / 29380423, -110615467 / 29380423, 69997945 / 29380423],
    ]
)


@dataclass(frozen=True)
class Step:
    """One accepted step: quartic interpolants in theta = (x - x0)/h."""

    lo: float
    hi: float
    x0: float
    h: float
    coef0: np.ndarray  # ascending theta coefficients for y0, length 5
    coef1: np.ndarray
    logscale: float

    def theta(self, x: float) -> float:
        return (x - self.x0) / self.h

    def values(self, x: float) -> tuple[complex, complex]:
        t = self.theta(x)
        v0 = 0.0 + 0.0j
        v1 = 0.0 + 0.0j
        for c0, c1 in zip(self.coef0[::-1], self.coef1[::-1]):
            v0 = v0 * t + c0
            v1 = v1 * t + c1
        return v0, v1


class _SegmentMatrix:
    """System entries restricted to one smooth segment, Horner-ready."""

    __slots__ = ("c11", "p11", "c21", "p21", "c22", "p22")

    def __init__(self, sys: ShinZettlSystem, rep: float):
        for name, poly in (("11", sys.a11), ("21", sys.a21), ("22", sys.a22)):
            i = poly._region(rep, "right")
            setattr(self, "c" + name, float(poly.centers[i]))
            setattr(self, "p" + name, tuple(poly.coeffs[i][::-1]))

    def rhs(self, x: float, y0: complex, y1: complex) -> tuple[complex, complex]:
        a11 = _horner(self.p11, x - self.c11)
        a21 = _horner(self.p21, x - self.c21)
        a22 = _horner(self.p22, x - self.c22)
        return a11 * y0 + y1, a21 * y0 + a22 * y1


def _horner(rev_coeffs, t):
    acc = 0.0 + 0.0j
    for c in rev_coeffs:
        acc = acc * t + c
    return acc


@dataclass
class Trajectory:
    """Dense-output solution of one system over an interval.

    ``steps`` are sorted by position; the true solution on a step is the
    stored interpolant times exp(step.logscale).  Rescaling never changes
    the direction of the state vector, only its magnitude.
    """

    system: ShinZettlSystem
    a: float
    b: float
    direction: str
    atol: float
    rtol: float
    steps: list[Step] = dc_field(default_factory=list)
    _los: list[float] | None = dc_field(default=None, repr=False, compare=False)

    def _locate(self, x: float) -> Step:
        if not (self.a - 1e-12 <= x <= self.b + 1e-12):
            raise ValueError(f"x={x} outside trajectory interval [{self.a}, {self.b}]")
        if self._los is None or len(self._los) != len(self.steps):
            self._los = [s.lo for s in self.steps]
        i = bisect.bisect_right(self._los, x) - 1
        i = max(0, min(i, len(self.steps) - 1))
        return self.steps[i]

    def state_at(self, x: float) -> QuasiState:
        s = self._locate(x)
        y0, y1 = s.values(x)
        return QuasiState(x=x, y0=y0, y1=y1, side=self.system.side, logscale=s.logscale)

    def end_state(self) -> QuasiState:
        return self.state_at(self.b if self.direction != "backward" else self.a)

    def log_sup(self, lo: float | None = None, hi: float | None = None) -> float:
        """log of sup |Y| over the covered range (sampled at step knots)."""
        lo = self.a if lo is None else lo
        hi = self.b if hi is None else hi
        best = -math.inf
        for s in self.steps:
            if s.hi < lo or s.lo > hi:
                continue
            for t in (0.0, 0.5, 1.0):
                x = s.x0 + t * s.h
                if lo - 1e-12 <= x <= hi + 1e-12:
                    v0, v1 = s.values(x)
                    m = max(abs(v0), abs(v1))
                    if m > 0:
                        best = max(best, math.log(m) + s.logscale)
        return best

    def to_piecewise(self, component: int = 0, lo: float | None = None, hi: float | None = None) -> PiecewisePoly:
        """Re-fit the dense output as a PiecewisePoly (absolute scale).

        End pieces extend into the tails.  Only valid when exp(logscale)
        is representable; refits are meant for desk-scale windows.
        """
        lo = self.a if lo is None else lo
        hi = self.b if hi is None else hi
        mesh: list[float] = []
        centers: list[float] = []
        pieces: list[np.ndarray] = []
        for s in sorted(self.steps, key=lambda t: t.lo):
            if s.hi <= lo + 1e-14 or s.lo >= hi - 1e-14:
                continue
            c = 0.5 * (max(s.lo, lo) + min(s.hi, hi))
            coef = s.coef0 if component == 0 else s.coef1
            # theta = (x - x0)/h = ((x - c) + (c - x0))/h
            alpha = 1.0 / s.h
            beta = (c - s.x0) / s.h
            sub = np.zeros(len(coef), dtype=complex)
            # compose coef(theta) with theta = beta + alpha*u by Horner on polynomials
            for ck in coef[::-1]:
                sub = _poly_affine_mul(sub, beta, alpha)
                sub[0] += ck
            scale = math.exp(s.logscale)
            mesh.append(min(s.hi, hi))
            centers.append(c)
            pieces.append(sub * scale)
        # interior knots only; the first/last piece double as the tails
        return PiecewisePoly._from_local(np.asarray(mesh[:-1]), np.asarray(centers), pieces)


def _poly_affine_mul(coeffs: np.ndarray, beta: float, alpha: float) -> np.ndarray:
    """coeffs(u) -> (beta + alpha*u) * coeffs(u), same length buffer."""
    out = np.zeros_like(coeffs)
    out += beta * coeffs
    out[1:] += alpha * coeffs[:-1]
    return out


@dataclass(frozen=True)
class FundamentalSystem:
    """Canonical solution pair with initial states (1,0) and (0,1) at x0."""

    y1: Trajectory
    y2: Trajectory
    x0: float


def integrate(
    sys: ShinZettlSystem,
    y0: QuasiState,
    to: float,
    tol: tuple[float, float] = (ATOL, RTOL),
) -> Trajectory:
    """Propagate a state to ``to``, breakpoints as hard mesh nodes.

    Local error per step is kept at atol + rtol*|Y|; the state is
    renormalized whenever |Y| exceeds 1e100 and the exponent is recorded
    per step.  Raises StepUnderflowError when the step size falls below
    1e-14 times the interval length.
    """
    atol, rtol = tol
    if atol <= 0 or rtol <= 0:
        raise ValueError("tolerances must be positive")
    x_from = y0.x
    if to == x_from:
        raise ValueError("empty integration interval")
    forward = to > x_from
    lo, hi = (x_from, to) if forward else (to, x_from)
    bps = [float(t) for t in sys.breakpoints() if lo < t < hi]
    nodes = [x_from] + sorted(bps, reverse=not forward) + [to]
    traj = Trajectory(
        system=sys,
        a=lo,
        b=hi,
        direction="forward" if forward else "backward",
        atol=atol,
        rtol=rtol,
    )
    y = (complex(y0.y0), complex(y0.y1))
    ls = float(y0.logscale)
    span = abs(to - x_from)
    h_floor = MIN_STEP_FRACTION * span
    for seg_a, seg_b in zip(nodes[:-1], nodes[1:]):
        y, ls = _integrate_segment(sys, traj, seg_a, seg_b, y, ls, atol, rtol, h_floor)
    traj.steps.sort(key=lambda s: s.lo)
    return traj


def _integrate_segment(sys, traj, xa, xb, y, ls, atol, rtol, h_floor):
    rep = 0.5 * (xa + xb)
    mat = _SegmentMatrix(sys, rep)
    seg_len = xb - xa
    direction = 1.0 if seg_len > 0 else -1.0
    x = xa
    h = direction * min(abs(seg_len), max(abs(seg_len) * 0.05, 1e-3))
    f_now = mat.rhs(x, *y)
    while (x - xb) * direction < 0:
        if abs(h) < h_floor:
            raise StepUnderflowError(
                f"step size {abs(h):.3e} below floor at x={x:.6g} "
                "(solution blow-up or coefficient pathology)"
            )
        if (x + h - xb) * direction > 0:
            h = xb - x
        k = [f_now]
        for i in range(1, 6):
            yy0 = y[0]
            yy1 = y[1]
            for aij, kj in zip(_A[i], k):
                yy0 += h * aij * kj[0]
                yy1 += h * aij * kj[1]
            k.append(mat.rhs(x + _C[i] * h, yy0, yy1))
        ynew0 = y[0]
        ynew1 = y[1]
        for bi, ki in zip(_B, k):
            ynew0 += h * bi * ki[0]
            ynew1 += h * bi * ki[1]
        f_new = mat.rhs(x + h, ynew0, ynew1)
        k.append(f_new)
        err0 = 0.0 + 0.0j
        err1 = 0.0 + 0.0j
        for ei, ki in zip(_E, k):
            err0 += h * ei * ki[0]
            err1 += h * ei * ki[1]
        sc0 = atol + rtol * max(abs(y[0]), abs(ynew0))
        sc1 = atol + rtol * max(abs(y[1]), abs(ynew1))
        err = math.sqrt(0.5 * ((abs(err0) / sc0) ** 2 + (abs(err1) / sc1) ** 2))
        if err <= 1.0:
            K = np.array(k, dtype=complex)  # 7 x 2
            Q = K.T @ _P  # 2 x 4
            coef0 = np.zeros(5, dtype=complex)
            coef1 = np.zeros(5, dtype=complex)
            coef0[0] = y[0]
            coef1[0] = y[1]
            coef0[1:] = h * Q[0]
            coef1[1:] = h * Q[1]
            # pin theta=1 to the accepted state exactly
            coef0[4] += ynew0 - coef0.sum()
            coef1[4] += ynew1 - coef1.sum()
            traj.steps.append(
                Step(
                    lo=min(x, x + h),
                    hi=max(x, x + h),
                    x0=x,
                    h=h,
                    coef0=coef0,
                    coef1=coef1,
                    logscale=ls,
                )
            )
            x = x + h
            y = (ynew0, ynew1)
            f_now = f_new
            m = max(abs(y[0]), abs(y[1]))
            if m > RESCALE_THRESHOLD:
                y = (y[0] / m, y[1] / m)
                f_now = (f_now[0] / m, f_now[1] / m)
                ls += math.log(m)
            factor = min(5.0, max(0.2, 0.9 * err ** -0.2)) if err > 0 else 5.0
            h *= factor
        else:
            h *= max(0.2, 0.9 * err ** -0.2)
    return y, ls


def fundamental(
    sys: ShinZettlSystem,
    x0: float,
    window: tuple[float, float],
    tol: tuple[float, float] = (ATOL, RTOL),
) -> FundamentalSystem:
    """Canonical pair covering the window in both directions from x0."""
    a, b = float(window[0]), float(window[1])
    if not (a <= x0 <= b):
        raise ValueError("anchor must lie inside the window")
    trajs = []
    for init in ((1.0, 0.0), (0.0, 1.0)):
        state = QuasiState(x=x0, y0=init[0], y1=init[1], side=sys.side)
        parts = []
        if x0 > a:
            parts.append(integrate(sys, state, a, tol))
        if x0 < b:
            parts.append(integrate(sys, state, b, tol))
        merged = Trajectory(
            system=sys, a=a, b=b, direction="both", atol=tol[0], rtol=tol[1]
        )
        for p in parts:
            merged.steps.extend(p.steps)
        merged.steps.sort(key=lambda s: s.lo)
        trajs.append(merged)
    return FundamentalSystem(y1=trajs[0], y2=trajs[1], x0=x0)


# ----------------------------------------------------------------------
# quadrature over dense output

_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(10)


def _knots(traj: Trajectory, a: float, b: float, extra=()) -> np.ndarray:
    ks = {a, b}
    ks.update(s.lo for s in traj.steps if a < s.lo < b)
    ks.update(s.hi for s in traj.steps if a < s.hi < b)
    ks.update(float(t) for t in extra if a < float(t) < b)
    return np.asarray(sorted(ks))


def pair_integral(
    u: Trajectory,
    v: Trajectory,
    a: float,
    b: float,
    weight: PiecewisePoly | None = None,
    comp_u: int = 0,
    comp_v: int = 0,
    conj_v: bool = True,
) -> tuple[complex, float]:
    """(mantissa, logscale) of int_a^b u_i * conj(v_j) * w dx on dense output.

    Gauss-Legendre of order 10 per merged knot interval: exact for the
    quartic interpolants times polynomial weights up to degree 11, and
    logscale-aware so exponentially large solutions never overflow.
    """
    extra = () if weight is None else weight.breakpoints
    ks = np.unique(np.concatenate([_knots(u, a, b), _knots(v, a, b), np.asarray([a, b]), np.asarray(extra, dtype=float)]))
    ks = ks[(ks >= a) & (ks <= b)]
    acc = 0.0 + 0.0j
    L = -math.inf
    for lo, hi in zip(ks[:-1], ks[1:]):
        if hi - lo <= 0:
            continue
        mid = 0.5 * (lo + hi)
        half = 0.5 * (hi - lo)
        su = u._locate(mid)
        sv = v._locate(mid)
        ls = su.logscale + sv.logscale
        xs = mid + half * _GL_NODES
        part = 0.0 + 0.0j
        for x, w in zip(xs, _GL_WEIGHTS):
            uu = su.values(x)[comp_u]
            vv = sv.values(x)[comp_v]
            if conj_v:
                vv = vv.conjugate()
            val = uu * vv
            if weight is not None:
                val *= weight.eval(float(x))
            part += w * val
        part *= half
        if ls > L:
            acc = acc * math.exp(L - ls) if L > -math.inf else 0.0
            L = ls
        acc += part * math.exp(ls - L)
    if L == -math.inf:
        return 0.0 + 0.0j, 0.0
    return acc, L
