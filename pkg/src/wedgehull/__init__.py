"""wedgehull: normal forms, Levi classification, and analytic-disc
certificates for hypersurface/edge wedge extension problems."""

__version__ = "0.1.0"

from .series import (  # noqa: F401
    TruncatedPoly,
    PolyMap,
    compose_truncated,
    compose_maps,
    invert_map_truncated,
    graph_solve,
    eval_poly,
    parse_rational,
    rational_str,
)
from .geometry import (  # noqa: F401
    EdgeModel,
    RoundCone,
    WedgeSpec,
    ambient_vars,
    cone_contains,
    edge_distance,
    param_vars,
    wedge_side,
)
from .normalform import (  # noqa: F401
    Classification,
    HypersurfaceModel,
    LeviData,
    NormalFormData,
    classify_wedge,
    levi_data,
    normal_form,
    transport_edge,
)
from .screens import (  # noqa: F401
    FoldingDisc,
    HullCertificate,
    folding_disc,
    max_modulus_audit,
    scaling_constants,
    spike_constants,
    spike_union_check,
    verify_screen_hull,
)
from .engines import (  # noqa: F401
    ambient_wedge_sweep,
    build_slice,
    hat_change,
    lewy_disc,
    minwedge_check,
    minwedge_constants,
    one_sided_set,
    shrink_wedge,
    spike_fit,
)
from .problem import ProblemFile, load_problem  # noqa: F401
from .report import canonical_json, emit_plot, render_report  # noqa: F401
