"""Bethe-ansatz eigenstates of three attractive delta-interacting bosons on a ring."""

from .model import (
    Branch,
    BranchCoords,
    ComplexCoords,
    Momenta,
    QuantumLabel,
    RealCoords,
    StateSolution,
    build_state,
    deltas_from_k,
    energy,
    k_from_alpha_gamma,
    k_from_deltas,
    np_from_label,
    partner_state,
    reference_state,
    strip_shift,
)
from .equations import (
    ConstraintViolationError,
    NoConvergenceError,
    ResidualPoint,
    SingularArgumentError,
    WindingState,
    ddelta_dc,
    gamma_squared_from_alpha,
    newton_solve,
    residual_complex,
    residual_equal_delta,
    residual_real,
    theta,
    tracked_log,
)
from .continuation import (
    BoundsViolationError,
    CriticalClass,
    CriticalPoint,
    SpectrumResult,
    Trajectory,
    branch_switch,
    critical_class,
    find_critical,
    solve_state,
    spectrum,
    trace_root,
)
from .wavefunction import (
    BetheAmplitudes,
    ClassificationError,
    DegenerateMomentaError,
    amplitudes,
    dimer_prefactor,
    dimer_trimer_weights,
    jump_residual,
    periodicity_residual,
    psi,
    psi_ordered,
)
from .observables import (
    SimplexCase,
    SimplexIntegralKey,
    TernaryGrid,
    classify_exponents,
    density_grid,
    norm_squared,
    potential_expectation,
    simplex_integral,
    simplex_integral_exponents,
)

__version__ = "0.1.0"
