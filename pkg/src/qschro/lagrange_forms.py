"""Lagrange brackets, the integral identity, and the pre-minimal form.

The bracket [u, v](x) = u * conj(v_adj_quasi_deriv) - u_quasi_deriv * conj(v)
plays the role of the Wronskian: its increment over a window equals the
defect between the two integrals of the Green-type identity, and it is
constant along solution pairs whose spectral parameters are conjugate.
The quadratic form of the compactly supported restriction splits into
kinetic, coupling and potential parts; sampling its normalized values
over a test family gives numerical-range evidence (never a proof) for
accretivity or sector membership.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from .coeffs import CoefficientField, PiecewisePoly
from .errors import SideMismatchError, UnsupportedTestFunctionError, ZeroNormError
from .propagate import Trajectory
from .quasi import ADJOINT, DIRECT, QuasiState, apply_l_atoms, effective_coefficients
from .reports import FAILS, HOLDS_SAMPLE, ConditionReport


@dataclass(frozen=True)
class BracketValue:
    x: float
    value: complex
    logscale: float = 0.0

    def absolute(self) -> complex:
        return self.value * math.exp(self.logscale)


@dataclass(frozen=True)
class FormValue:
    """Quadratic form split into its three integrals; value is their sum."""

    kinetic: complex
    coupling: complex
    potential: complex

    @property
    def value(self) -> complex:
        return self.kinetic + self.coupling + self.potential


@dataclass(frozen=True)
class Sector:
    """Closed sector of the right half-plane with vertex 0, half-angle theta."""

    half_angle: float

    def __post_init__(self):
        if not 0 < self.half_angle <= math.pi / 2:
            raise ValueError("half-angle must lie in (0, pi/2]")

    def contains(self, w: complex, tol: float = 1e-12) -> bool:
        scale = 1.0 + abs(w)
        if w.real < -tol * scale:
            return False
        if self.half_angle >= math.pi / 2 - 1e-15:
            return True
        return abs(w.imag) <= math.tan(self.half_angle) * w.real + tol * scale


def bracket(u: QuasiState, v: QuasiState) -> BracketValue:
    """[u, v] at a common point; u direct-side, v adjoint-side."""
    if u.side != DIRECT or v.side != ADJOINT:
        raise SideMismatchError(
            f"bracket needs (direct, adjoint) states, got ({u.side}, {v.side})"
        )
    if abs(u.x - v.x) > 1e-12 * (1.0 + abs(u.x)):
        raise ValueError(f"states live at different points: {u.x} vs {v.x}")
    val = u.y0 * v.y1.conjugate() - u.y1 * v.y0.conjugate()
    return BracketValue(x=u.x, value=val, logscale=u.logscale + v.logscale)


def bracket_constancy_residual(
    u: Trajectory, v: Trajectory, window: tuple[float, float], samples: int = 50
) -> float:
    """Sup of |[u,v](x) - [u,v](a)| over the window, scale-normalized.

    Zero (to solver accuracy) whenever u solves the direct equation at
    lambda and v the adjoint one at conj(lambda).  The scale is the sup of
    the bracket's term magnitudes |u||v_quasi| + |u_quasi||v|: for growing
    solution pairs the bracket is a tiny difference of huge products and
    only that cancellation scale is numerically meaningful.
    """
    a, b = float(window[0]), float(window[1])
    xs = np.linspace(a, b, samples)
    vals = []
    mags = []
    for x in xs:
        su = u.state_at(float(x))
        sv = v.state_at(float(x))
        br = bracket(su, sv)
        vals.append((br.value, br.logscale))
        mags.append(
            (abs(su.y0 * sv.y1) + abs(su.y1 * sv.y0), su.logscale + sv.logscale)
        )
    L = max(ls for _, ls in vals)
    abs_vals = [m * math.exp(ls - L) for m, ls in vals]
    ref = abs_vals[0]
    scale = max(m * math.exp(ls - L) for m, ls in mags)
    scale += math.exp(-L) if L > -700 else 0.0
    return max(abs(z - ref) for z in abs_vals) / scale


class _Side:
    """Uniform evaluation adapter: Trajectory or PiecewisePoly solution data."""

    def __init__(self, c: CoefficientField, obj, side: str, window):
        self.side = side
        if isinstance(obj, Trajectory):
            if obj.system.side != side:
                raise SideMismatchError(
                    f"expected a {side}-side trajectory, got {obj.system.side}"
                )
            self.traj = obj
            self.lam = obj.system.lam
            self.poly = None
            self.expr = None
            self.atoms = {}
        elif isinstance(obj, PiecewisePoly):
            self.traj = None
            self.poly = obj
            g1, _, _ = effective_coefficients(c, side)
            self._q1 = obj.derivative() - g1 * obj
            self.expr, self.atoms = apply_l_atoms(c, side, obj, window)
        else:
            raise TypeError(f"expected Trajectory or PiecewisePoly, got {type(obj)!r}")

    def state(self, x: float, inner: str) -> tuple[complex, complex, float]:
        if self.traj is not None:
            s = self.traj.state_at(x)
            return s.y0, s.y1, s.logscale
        return self.poly.eval(x, inner), self._q1.eval(x, inner), 0.0

    def expr_value(self, x: float) -> tuple[complex, float]:
        """Value of the applied expression at x (no atoms)."""
        if self.traj is not None:
            s = self.traj.state_at(x)
            return self.lam * s.y0, s.logscale
        return self.expr.eval(x), 0.0

    def knots(self, a: float, b: float) -> set[float]:
        ks: set[float] = set()
        if self.traj is not None:
            for s in self.traj.steps:
                if a < s.lo < b:
                    ks.add(s.lo)
                if a < s.hi < b:
                    ks.add(s.hi)
        else:
            ks.update(t for t in map(float, self.expr.breakpoints) if a < t < b)
            ks.update(t for t in map(float, self.poly.breakpoints) if a < t < b)
        return ks


_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(12)


def _dot(fu, fv, a: float, b: float) -> tuple[complex, float]:
    """(mantissa, logscale) of int fu(x) * conj(fv(x)) dx for _Side value fns.

    fu/fv: callables x -> (value, logscale); logscale constant per panel.
    """
    acc = 0.0 + 0.0j
    L = -math.inf
    knots = fu["knots"] | fv["knots"]
    ks = sorted(knots)
    for lo, hi in zip(ks[:-1], ks[1:]):
        if hi - lo <= 0:
            continue
        mid = 0.5 * (lo + hi)
        half = 0.5 * (hi - lo)
        _, ls_u = fu["fn"](mid)
        _, ls_v = fv["fn"](mid)
        ls = ls_u + ls_v
        part = 0.0 + 0.0j
        for t, w in zip(_GL_NODES, _GL_WEIGHTS):
            x = mid + half * t
            vu, _ = fu["fn"](x)
            vv, _ = fv["fn"](x)
            part += w * vu * vv.conjugate()
        part *= half
        if ls > L:
            acc = acc * math.exp(L - ls) if L > -math.inf else 0.0
            L = ls
        acc += part * math.exp(ls - L)
    if L == -math.inf:
        return 0.0 + 0.0j, 0.0
    return acc, L


def lagrange_residual(
    c: CoefficientField,
    u,
    v,
    window: tuple[float, float],
) -> float:
    """Defect of the integral identity over a window, scale-normalized.

    Computes |int l[u] conj(v) - int u conj(l_adj[v]) - ([u,v](b) - [u,v](a))|
    relative to 1 + the magnitudes of the four terms.  u is direct-side
    data (Trajectory of the direct system, or a PiecewisePoly to which the
    expression is applied exactly); v is the adjoint-side counterpart.
    Dirac atoms of either expression contribute their point terms.
    """
    a, b = float(window[0]), float(window[1])
    su = _Side(c, u, DIRECT, (a, b))
    sv = _Side(c, v, ADJOINT, (a, b))
    knots = {a, b} | su.knots(a, b) | sv.knots(a, b)

    fu_expr = {"fn": su.expr_value, "knots": knots}
    fv_val = {"fn": lambda x: (sv.state(x, "right")[0], sv.state(x, "right")[2]), "knots": knots}
    i1, L1 = _dot(fu_expr, fv_val, a, b)
    fu_val = {"fn": lambda x: (su.state(x, "right")[0], su.state(x, "right")[2]), "knots": knots}
    fv_expr = {"fn": sv.expr_value, "knots": knots}
    i2, L2 = _dot(fu_val, fv_expr, a, b)

    # atom contributions: int w*delta_p * conj(v) = w * conj(v(p))
    for p, w in su.atoms.items():
        if a <= p <= b:
            y0v, _, lsv = sv.state(p, "right")
            i1, L1 = _acc(i1, L1, w * y0v.conjugate(), lsv)
    for p, w in sv.atoms.items():
        if a <= p <= b:
            y0u, _, lsu = su.state(p, "right")
            i2, L2 = _acc(i2, L2, y0u * w.conjugate(), lsu)

    bra = _bracket_at(su, sv, a, inner="right")
    brb = _bracket_at(su, sv, b, inner="left")

    vals = [(i1, L1), (i2, L2), (brb.value, brb.logscale), (bra.value, bra.logscale)]
    L = max(ls for _, ls in vals)
    z1, z2, zb, za = (m * math.exp(ls - L) for m, ls in vals)
    resid = abs(z1 - z2 - (zb - za))
    scale = math.exp(-L) + abs(z1) + abs(z2) + abs(zb) + abs(za) if L > -700 else 1.0
    return resid / scale


def _acc(m: complex, L: float, add: complex, ls: float) -> tuple[complex, float]:
    if ls > L:
        return m * math.exp(L - ls) + add, ls
    return m + add * math.exp(ls - L), L


def _bracket_at(su: _Side, sv: _Side, x: float, inner: str) -> BracketValue:
    y0u, y1u, lu = su.state(x, inner)
    y0v, y1v, lv = sv.state(x, inner)
    val = y0u * y1v.conjugate() - y1u * y0v.conjugate()
    return BracketValue(x=x, value=val, logscale=lu + lv)


def quadratic_form(
    c: CoefficientField,
    u: PiecewisePoly,
    support: tuple[float, float],
) -> FormValue:
    """The pre-minimal form t(u), exactly, split into its three parts.

    t(u) = int |u'|^2 - int (G1 u conj(u)' + G2 u' conj(u)) + int s |u|^2.
    u must be continuous with compact support inside ``support``.
    """
    a, b = float(support[0]), float(support[1])
    lo, hi = u.support_bounds()
    if lo < a - 1e-12 or hi > b + 1e-12:
        raise UnsupportedTestFunctionError(
            f"test function supported on [{lo}, {hi}], outside [{a}, {b}]"
        )
    scale = u.coeff_scale() or 1.0
    for p, h in u.jumps.items():
        if abs(h) > 1e-10 * scale:
            raise UnsupportedTestFunctionError(f"test function jumps at x={p}")
    du = u.derivative()
    kinetic = (du * du.conj()).integrate(a, b)
    coupling = -((c.G1 * u * du.conj()) + (c.G2 * du * u.conj())).integrate(a, b)
    potential = (c.s * u * u.conj()).integrate(a, b)
    return FormValue(kinetic=kinetic, coupling=coupling, potential=potential)


def form_vs_operator_check(
    c: CoefficientField,
    u: PiecewisePoly,
    support: tuple[float, float],
) -> float:
    """|t(u) - int l[u] conj(u)| over 1 + magnitudes.

    Both sides are computed independently: the form by exact quadrature of
    its three integrals, the operator side by applying the expression and
    integrating against conj(u), Dirac atoms included.
    """
    a, b = float(support[0]), float(support[1])
    form = quadratic_form(c, u, support).value
    expr, atoms = apply_l_atoms(c, DIRECT, u, (a, b))
    op = (expr * u.conj()).integrate(a, b)
    op += sum(w * u.eval(p).conjugate() for p, w in atoms.items() if a <= p <= b)
    return abs(form - op) / (1.0 + abs(form) + abs(op))


def numerical_range_sample(
    c: CoefficientField,
    family,
    sector: Sector | None = None,
    support: tuple[float, float] | None = None,
) -> ConditionReport:
    """Sample w(u) = t(u)/||u||^2 over a test family; verdict on the sample.

    Reports min Re w, max |arg w| and per-sample values; ``fails`` carries
    the witness index and value if any w leaves the sector (default
    sector: the closed right half-plane, i.e. accretivity).  A passing
    verdict is "holds-on-sample", never a proof.
    """
    if not family:
        raise ValueError("test family must be nonempty")
    rows = []
    witness = None
    check_sector = sector or Sector(math.pi / 2)
    for i, u in enumerate(family):
        lo, hi = support if support is not None else u.support_bounds()
        if not (math.isfinite(lo) and math.isfinite(hi)):
            raise UnsupportedTestFunctionError(
                f"test function {i} is not compactly supported"
            )
        norm2 = (u * u.conj()).integrate(lo, hi).real
        if norm2 <= 1e-300:
            raise ZeroNormError(f"test function {i} has zero L2 norm")
        w = quadratic_form(c, u, (lo, hi)).value / norm2
        inside = check_sector.contains(w)
        rows.append((i, w.real, w.imag, norm2, inside))
        if not inside and witness is None:
            witness = (i, w)
    min_re = min(r[1] for r in rows)
    max_arg = max(
        (abs(cmath.phase(complex(r[1], r[2]))) for r in rows if (r[1], r[2]) != (0, 0)),
        default=0.0,
    )
    witnesses = {
        "min_re_w": min_re,
        "max_abs_arg_w": max_arg,
        "sector_half_angle": check_sector.half_angle,
    }
    if witness is not None:
        witnesses["witness_index"] = witness[0]
        witnesses["witness_value"] = witness[1]
        verdict = FAILS
    else:
        verdict = HOLDS_SAMPLE
    return ConditionReport(
        check="numerical-range",
        verdict=verdict,
        witnesses=witnesses,
        tables={"samples": rows},
    )
