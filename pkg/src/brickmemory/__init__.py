"""Exact annealed distances between reduced states under Haar brickwork circuits."""

__version__ = "0.1.0"

from .distance import (  # noqa: E402
    DistanceSeries,
    annealed_distance_sq,
    distance_series,
    infinite_time_exact,
    infinite_time_limit,
    infinite_time_mixed,
    infinite_time_pure,
    t_state_contraction,
)
from .estimator import AnnealedDistance  # noqa: E402
from .profiles import (  # noqa: E402
    MixedLongTime,
    OverlapProfile,
    PairProduct,
    Tabulated,
    UniformOne,
    WState,
    pair_product_profile,
    parse_profile,
    w_state_profile,
)
from .validation import (  # noqa: E402
    CircuitGeometry,
    CriticalPointError,
    GeometryError,
    ProfileError,
    SizeGuardError,
)
from .walkcoeff import WalkCoefficientTable, walk_table  # noqa: E402

__all__ = [
    "__version__",
    "AnnealedDistance",
    "CircuitGeometry",
    "CriticalPointError",
    "DistanceSeries",
    "GeometryError",
    "MixedLongTime",
    "OverlapProfile",
    "PairProduct",
    "ProfileError",
    "SizeGuardError",
    "Tabulated",
    "UniformOne",
    "WState",
    "WalkCoefficientTable",
    "annealed_distance_sq",
    "distance_series",
    "infinite_time_exact",
    "infinite_time_limit",
    "infinite_time_mixed",
    "infinite_time_pure",
    "pair_product_profile",
    "parse_profile",
    "t_state_contraction",
    "w_state_profile",
    "walk_table",
]
