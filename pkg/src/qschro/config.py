"""Tunable numerical constants, collected in one place.

Verdicts produced by the condition checkers and the null-space probe are
numerical classifications, not proofs; the margins below make the
classification rules explicit and reproducible.
"""

# Default degree cap for user-constructed piecewise polynomials.  Products
# may exceed the cap internally (degree doubles), the cap only guards input.
DEGREE_CAP = 8

# Default integrator tolerances.  End-to-end acceptance targets are in the
# 1e-6..1e-8 range, so the one-step pair runs well below that.
ATOL = 1e-12
RTOL = 1e-10

# |Y| threshold that triggers log-rescaling of a propagated state.
RESCALE_THRESHOLD = 1e100

# Step-size floor, relative to the integration interval length.
MIN_STEP_FRACTION = 1e-14

# Null-space probe: "grows" needs N(Tmax) >= GROWTH_FACTOR * N(T0) with a
# monotone trend AND the outermost window doubling still adding at least
# SUSTAINED_MIN relative mass; "bounded" needs the last window increment
# to stay within SATURATION_FRACTION of the final value.
PROBE_GROWTH_FACTOR = 100.0
PROBE_SATURATION_FRACTION = 0.01
PROBE_SUSTAINED_MIN = 0.05

# Partial integrals I(T) of 1/m are "divergence-consistent" when the outer
# half of the horizon still contributes at least this fraction of I(X).
DIVERGENCE_MARGIN_FRACTION = 0.05

# Growth-envelope and per-interval-constant trend tolerance: outer-block
# maxima may exceed inner-block maxima by this relative slack and still
# count as "non-increasing" (bounded) on the horizon.
ENVELOPE_GROWTH_TOL = 0.05

# Blocks used when scanning envelope trends over a horizon.
ENVELOPE_BLOCKS = 8

# Shooting acceptance: |D(lambda)| <= CHAR_TOL * (cancellation scale of D).
CHAR_TOL = 1e-9

# Newton refinement of the characteristic function.
NEWTON_MAX_ITER = 50
NEWTON_FD_STEP = 1e-6

# Eigenvalues closer than this are merged as duplicates.
EIG_MERGE_TOL = 1e-8

# Jump height below which a quasi-derivative is treated as continuous
# (absolute, scaled by the local state magnitude).
JUMP_TOL = 1e-8

# Max slope of the cubic smoothstep ramp on a unit interval.
SMOOTHSTEP_SLOPE = 1.5
