"""scenerywalk: Monte Carlo lab for random walks in random scenery and
for the planar walk on randomly oriented layers.

The package simulates the lattice models, checks the exact small-n laws by
enumeration, and measures the scaling laws (range growth, survival
probability, self-intersection growth) together with the constants that
enter them.
"""

__version__ = "0.1.0"

from .samplers import (
    GaussianScenery,
    HeavyTailWalk,
    LazyWalk,
    Rademacher,
    SimpleWalk,
    StableParams,
    StableScenery,
    SymmetricZipf,
    Ternary,
    sample_stable,
    scenery_dist,
    walk_dist,
)
from .streams import ReplicaStreams, Stream, stream_key
from .walk_core import Trajectory, self_intersections, self_intersections_beta, simulate_walk
from .rwrs import (
    RwrsStats,
    SceneryMap,
    delta_exponent,
    norm_sequence,
    rwrs_self_intersections,
    simulate_rwrs,
)
from .mdm import Environment, MdmConfig, MdmStats, k_p, mdm_ensemble, simulate_mdm
from .ks_limit import (
    KsGrid,
    SupEstimate,
    estimate_kappa,
    extrapolate_sup,
    rwrs_tail_constant,
    simulate_ks_sup,
    sup_ensemble,
    survival_amplitude,
)
from .estimators import (
    EnsembleEstimate,
    MdmModel,
    PowerLawFit,
    RwrsModel,
    fit_amplitude,
    fit_log_corrected,
    fit_power_law,
    fluctuation_exponent,
    mean_range_identity_check,
    run_range_experiment,
    run_survival_experiment,
)
from .oracle import BudgetExceededError, exact_mdm, exact_return_probs, exact_rwrs
