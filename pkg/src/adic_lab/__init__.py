"""Bratteli-Vershik systems, weak-mixing orderings and dimension-group invariants."""

__version__ = "0.1.0"

from .certificate import (
    FAILS,
    HOLDS,
    INCONCLUSIVE,
    AdicError,
    Certificate,
    DiagramError,
    GuardError,
    InconclusiveError,
    LevelError,
)
from .diagram import (
    Diagram,
    HeightVector,
    TelescopePlan,
    gcd_condition,
    heights,
    odometer,
    simplicity_check,
    stationary_diagram,
    telescope,
)
from .dimgroup import (
    GroupElement,
    MiscibilityCertificate,
    TraceInterval,
    basis,
    constant_image_test,
    equal_in_limit,
    miscibility_certificate,
    push,
    rational_subgroup_probe,
    rational_trace,
    spectral_rank_bound,
    trace_interval,
    unit,
    unit_divisors,
)
from .document import DiagramDocument, export_dot
from .dynamics import (
    MAX_AT_DEPTH,
    EdgeOrdering,
    PathPrefix,
    check_c47,
    orbit_of_min,
    proper_order_check,
    return_times,
    successor,
    truncation_factor_check,
)
from .spectrum import (
    CylinderFunction,
    ThetaImage,
    integer_coboundary_check,
    measure_interval_of_cylinder,
    odometer_spectrum,
    theta_map,
    verify_rational_eigenvalue,
)
from .weakmix import (
    CoinSolution,
    build_weakmix_order,
    coin_solve,
    frobenius_representable,
    plan_telescoping,
)
