"""Central tolerance and regime constants.

Every numeric acceptance knob lives here so the whole suite can be tightened
or relaxed in one place.  The residual tolerance may be overridden at runtime
through the BETHE3_TOL environment variable (used by the CLI and by any solver
entry point called with tol=None).
"""
from __future__ import annotations

import os

# Root-solving
RESIDUAL_TOL = 1e-12        # default inf-norm residual at accepted roots
NEWTON_MAX_ITER = 100
NEWTON_MAX_HALVINGS = 40
FD_STEP = 1e-7              # central-difference Jacobian step (scaled space)

# Identity / bookkeeping checks
IDENTITY_TOL = 1e-10        # momentum conservation, round trips
IMAG_TOL = 1e-10            # residual imaginary parts must cancel below this
ENERGY_AGREEMENT_RTOL = 1e-12  # sum(k^2) vs coordinate energy formulas

# Wavefunction / observables
DEGENERATE_MOMENTA_TOL = 1e-12  # pairwise |k_j - k_l| below this: raw ansatz vanishes
ZERO_EXPONENT_TOL = 1e-10       # simplex-exponent treated as exactly zero
NEAR_DEGENERATE_EXPONENT = 1e-6  # window routed to the nearest limiting case
NORM_IMAG_RTOL = 1e-9           # relative imaginary defect allowed in <psi|psi>

# Continuation
BASE_STEP = 0.05            # default c-grid spacing
FOLD_ALPHA_SMALL = 0.3      # |delta1| / alpha below this: use the local fold model
FOLD_MIN_SPAN = 1e-6        # refine fold-side grid points down to this distance from C

# Asymptotic regime admissibility (artifact choices, see module docs)
LARGE_C_MIN = 20.0          # |c| for the first-order real-branch asymptotes
DIMER_C_MAX = -15.0         # c below this: dimer expansions apply
TRIMER_C_MAX = -15.0        # c below this: trimer expansions apply
SMALL_C_MAX = 0.05          # |c| for the small-coupling series


def residual_tolerance(tol: float | None = None) -> float:
    """Resolve the residual tolerance: explicit value, else BETHE3_TOL, else default."""
    if tol is not None:
        return float(tol)
    env = os.environ.get("BETHE3_TOL")
    if env is not None:
        value = float(env)
        if not value > 0.0:
            raise ValueError(f"BETHE3_TOL must be positive, got {env!r}")
        return value
    return RESIDUAL_TOL
