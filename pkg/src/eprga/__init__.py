"""Event-by-event geometric-algebra simulator for EPR-Bohm correlations."""
from .algebra import (
    I,
    Multivector,
    as_direction,
    basis_bivector,
    even_decompose,
    geometric_product,
    oriented_product,
    reverse,
    unit_bivector,
)
from .chsh import (
    ChshConfig,
    chsh_separate,
    chsh_single_average,
    dispute_eval,
    third_spin_average,
    torsion,
    variance_bound,
)
from .estimators import (
    CorrelationAccumulator,
    PearsonStats,
    accumulate_standard,
    bivector_sigma,
    finalize_standard,
    pearson_raw,
    standardize,
    stderr_scalar,
)
from .experiment import ExperimentConfig, analyze, chsh_run, record, simulate
from .spin import (
    TrialStream,
    measure_A,
    measure_B,
    oriented_spin_product,
    raw_sign_A,
    raw_sign_B,
    trial_quaternion,
    verify_singlet_chain,
)
from .verify import verify

__version__ = "0.1.0"
