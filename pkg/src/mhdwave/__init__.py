"""mhdwave: pseudo-spectral simulator and verification harness for the 2D
damped wave-type MHD system on a periodic box."""

__version__ = "0.1.0"

from .grid import (  # noqa: F401
    GridSpec,
    RealField,
    SpectralVectorField,
    WaveVector,
    dealias,
    fractional_laplacian_apply,
    leray_project,
    transform_forward,
    transform_inverse,
)
from .initial import make_initial_data  # noqa: F401
from .kernels import (  # noqa: F401
    EigenPair,
    FrequencyRegion,
    KernelParams,
    ModePropagator,
    duhamel_k1_weight,
    frequency_region,
    k0_hat,
    k1_hat,
    lambda_pm,
    mode_propagator,
    verify_kernel_bounds,
)
from .solver import (  # noqa: F401
    SolverConfig,
    State,
    Trajectory,
    compute_nonlinear,
    run,
    step_exp,
    step_imex,
    step_mhd_baseline,
)
from .diagnostics import (  # noqa: F401
    energy_functionals,
    inequality_spot_checks,
    linear_energy_residual,
    lq_norm,
    sobolev_seminorm,
)
from .decay import (  # noqa: F401
    PowerLawFit,
    TheoryRate,
    fit_power_law,
    gamma_prefactor_scan,
    predicted_exponent,
    run_decay_experiment,
    singular_limit_experiment,
    verify_expintegral,
)
