"""Quadratic stochastic operators of heredity and the non-homogeneous
Markov chains they induce."""

from .core import (
    ChainSchedule,
    CubicHeredityMatrix,
    SimplexPoint,
    StochasticMatrix,
    random_cubic,
    random_simplex,
    random_stochastic,
    slice_block,
    validate_cubic,
    validate_simplex,
    validate_stochastic,
)
from .ergodicity import (
    CesaroEstimate,
    ErgodicityReport,
    cesaro_estimate,
    chain_product,
    column_spread,
    dobrushin_coefficient,
    dyadic_horizons,
    is_scrambling,
    weak_ergodicity_diagnostic,
)
from .operators import (
    Trajectory,
    bernoulli_apply,
    induced_transition,
    markov_apply,
    markov_apply_via_matrix,
    pi_action,
    run_trajectory,
)
from .zakharevich import (
    ZakharevichExperimentConfig,
    continuity_probe,
    nonergodicity_experiment,
    scramble_scan,
    zakharevich_cubic,
    zakharevich_map,
    zakharevich_Q,
)

__version__ = "0.1.0"
