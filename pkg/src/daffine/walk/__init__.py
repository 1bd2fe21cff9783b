"""Random walks on DA(T): step distributions, trajectories and statistics."""
from .engine import (
    Checkpoint,
    FinalConfigurationWindow,
    NodePool,
    Trajectory,
    WalkState,
    chain_rng,
    sample_increments,
    sample_path,
)
from .measures import (
    StepDistribution,
    biased_s1,
    from_weights,
    load_mu_file,
    parse_mu,
    uniform_s0,
    uniform_s1,
)
from .returns import (
    ConfinementBound,
    MCEstimate,
    ReturnTable,
    confinement_lower_bound,
    confinement_probability,
    return_counts_mc,
    return_probability_exact,
    return_probability_mc,
    wilson_interval,
)
from .stats import (
    drift_stats,
    geodesic_tracking_stats,
    stabilization_check,
    stabilize_window,
    support_profile,
    tau_ell,
)

make_mu = parse_mu


def lazify(mu: StepDistribution) -> StepDistribution:
    return mu.lazify()
