"""Ball-model hyperbolic geometry and boundary predicates."""
from .ball import (
    GeometryError,
    GeodesicLine,
    HCircle,
    Horocycle,
    as_point,
    circle_from_euclidean,
    conformal_factor,
    geodesic_point,
    geodesic_through,
    horocycle_through,
    hyp_circle,
    hyp_distance,
    mobius_translate,
)
from .curves import SampledCurve, circle_curve, fit_circle, set_distance, sphere_cloud, union_distance
from .predicates import (
    INFINITE,
    PredicateResult,
    convexity_check,
    exterior_sphere_check,
    interior_sphere_check,
)
