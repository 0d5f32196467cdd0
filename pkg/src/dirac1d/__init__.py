"""Solvers and benchmarks for the 1D two-component Dirac equation.

The governed equation on a periodic interval (a, b), with a small parameter
0 < eps <= 1 scaling the electromagnetic potentials, is

    i dPhi/dt = (-i sigma1 d/dx + sigma3) Phi
                + eps (V(t,x) I2 - A1(t,x) sigma1) Phi.

Eight schemes are provided: four finite-difference-in-space steppers
(cnfd, sifd1, sifd2, lffd) and four Fourier-pseudospectral ones
(cnfp, sifp1, sifp2, lffp), plus an exact free-flow solver and a
Strang-splitting (TSFP) reference integrator.  The harness measures errors
against reference solutions over the long horizon t = T0/eps and emits
convergence tables as CSV.
"""

from .errors import (
    BlowUpError,
    ConfigurationError,
    Dirac1DError,
    SolverError,
    StabilityError,
)
from .grid import (
    SpectralCoeffs,
    SpinorField,
    TorusGrid,
    centered_difference,
    dft,
    field_from_function,
    idft,
    make_grid,
    norm,
    spectral_derivative,
    subsample,
    trig_resample,
)
from .model import (
    DiracProblem,
    Observables,
    PotentialPair,
    ProblemSetup,
    check_bounds,
    continuity_residual,
    current,
    density,
    energy_fd,
    energy_fp,
    mass,
    observables,
    preset,
    preset_names,
    sample_potential_matrix,
    zero_potentials,
)
from .stepping import SolverDiagnostics, Stepper, StepperState, first_step, make_stepper
from .fdtd import (
    CNFDStepper,
    LFFDStepper,
    SIFD1Stepper,
    SIFD2Stepper,
    cnfd_step,
    lffd_step,
    sifd1_step,
    sifd2_step,
)
from .fdfp import (
    CNFPStepper,
    FixedPointConfig,
    LFFPStepper,
    SIFP1Stepper,
    SIFP2Stepper,
    cnfp_step,
    lffp_step,
    sifp1_step,
    sifp2_step,
)
from .stability import (
    ALL_SCHEMES,
    FDFP_SCHEMES,
    FDTD_SCHEMES,
    UNBOUNDED,
    StabilityVerdict,
    tau_max,
    validate,
)
from .reference import (
    ExactFreeReference,
    ReferenceCache,
    ReferenceSolution,
    TSFPStepper,
    free_dirac_exact,
    load_reference,
    reference_cache_key,
    reference_solution,
    save_reference,
    tsfp_step,
)
from .harness import (
    ConvergenceTable,
    ErrorReport,
    ErrorSeries,
    ReferenceConfig,
    SchemeConfig,
    SimulationResult,
    compare_over_time,
    convergence_table,
    emit_csv,
    emit_plot_data,
    epsilon_sweep_spatial,
    epsilon_sweep_temporal,
    make_truncated_domain,
    measure_errors,
    run_simulation,
    validate_config,
)
from .expressions import Expression, ExpressionError, compile_expression

__version__ = "0.1.0"
