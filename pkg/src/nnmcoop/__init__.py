"""Static base-station cooperation groups from the mutual-nearest-neighbour rule.

A Poisson point process of base stations is split into *singles* and
*pairs* (atoms that are each other's nearest neighbour). The package
simulates this dependent thinning, estimates the spatial statistics of the
two subprocesses, and evaluates their interference fields.
"""

from .analytic import (
    QuadratureSpec,
    expected_interference_pairs,
    expected_interference_singles,
    expected_interference_singles_closed_form,
    intensity_density,
    nn_cdf_pairs,
    nn_cdf_reference,
    p_star,
    pair_probability,
)
from .channel import CooperationScheme, PathLossModel, channel_gain, pair_signal
from .errors import DivergenceError, DomainError, NumericalError, TruncationError
from .geometry import GAMMA, BoundaryPolicy, Window, distance, gamma_constant, lens_union_area
from .grouping import (
    GroupingResult,
    NearestNeighbourMap,
    build_nn_map,
    classify_k2,
    classify_k3,
    group,
    subpattern,
)
from .interference import (
    InterferenceSample,
    empirical_laplace,
    sample_interference,
    simulate_interference,
    simulate_window_interference,
)
from .laplace import LaplaceSeriesSpec, laplace_transform_pairs, laplace_transform_singles
from .process import PointPattern, SeedSpec, independent_thin, sample_ppp
from .statistics import (
    EmpiricalCurve,
    ReplicationPlan,
    estimate_class_fractions,
    estimate_empty_space,
    estimate_nn_function,
    estimate_voronoi_shares,
    j_function,
    ks_poisson_count_test,
    ks_poisson_test,
)

__version__ = "0.1.0"
