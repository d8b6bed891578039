"""Eigenvalue curves of 2-bridge links, K2 symbol certificates, and
numerical regulator integrals (volume, monodromy, quantization)."""

from .errors import EigenregError
from .ratpoly import (
    MultiPoly,
    edge_polynomial,
    format_poly,
    is_cyclotomic_product,
    newton_polygon,
    parse_poly,
    resultant,
    univariate_factor,
)
from .twobridge import (
    EigenCurve,
    TwoBridgeCode,
    basepoint,
    eigen_curve,
    load_curve,
    load_link_file,
    presentation,
    rep_family,
    riley_polynomial,
    save_curve,
)
from .symbols import (
    EdgePlace,
    FinitePlace,
    FormalSymbol,
    star_product,
    symbol_normalize,
    symbol_order_candidate,
    tame_symbol,
    temperedness,
)
from .oracle import (
    Triangulation,
    bloch_wigner,
    load_triangulation,
    lobachevsky,
    solve_gluing,
)
from .regulator import (
    PathSpec,
    PathState,
    based_loop_path,
    calibrate,
    constant_path,
    integrate_eta,
    integrate_xi,
    load_path_spec,
    meridian_segment_path,
    monodromy,
    quantization_check,
    rectangle_loop_path,
    special_cs_along,
    track_path,
    volume_along,
)

__version__ = "0.1.0"
