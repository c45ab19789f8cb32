"""Spaces of Keplerian orbits: integrals of motion, charts, orbit metrics and topological witnesses."""

from .core import (
    DEFAULT_KAPPA2,
    CollisionError,
    EllipticOrbit,
    KeplerElements,
    OrbitClass,
    OrbitError,
    OrbitPoint,
    StateVector,
    classify,
    constraint_residuals,
    elements_to_orbit,
    integrals_of_motion,
    on_manifold,
    orbit_to_elements,
    propagate,
    state_from_elements,
)
from .charts import (
    ChartError,
    NormalizedOrbitPoint,
    SphereProductPoint,
    TangentChartPoint,
    chart_curvilinear,
    chart_curvilinear_inv,
    chart_estar,
    chart_estar_inv,
    chart_h_forward,
    chart_h_inverse,
    denormalize,
    normalize,
)
from .metrics import (
    DistanceResult,
    EllipseFrame,
    MetricSpec,
    ellipse_frame,
    p_monotonicity_check,
    quotient_equal,
    rho,
    rho2_closed_form,
    rho_many,
    rho_star,
    rho_star_many,
)
from .witnesses import (
    CauchyReport,
    DegreeReport,
    TriangulatedSphere,
    cauchy_circle_witness,
    completeness_probe,
    icosphere,
    orbit_sphere_obstruction,
    sphere_degree,
    unbounded_components_witness,
)
from .catalog import (
    CatalogError,
    CatalogRecord,
    RunConfig,
    distance_matrix,
    load_catalog,
    nearest,
    save_catalog,
)

__version__ = "0.1.0"
