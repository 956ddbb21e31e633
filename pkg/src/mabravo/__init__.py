"""MABRAVO unicast and AoI-cast routing over 2-D Voronoi overlays."""

from .aoi import AreaOfInterest, aoi_members, cell_in_aoi, interest_geometry, make_aoi, site_in_aoi
from .errors import (
    InvalidInputError,
    MabravoError,
    NotFoundError,
    PreconditionError,
    ProtocolMisuseError,
    TopologyInconsistencyError,
    TtlExpiredError,
)
from .geometry import Box, ConvexPolygon, Point, gift_wrap, set_tolerance, tolerance
from .oracle import duality_reference, oracle_aoicast_tree, oracle_unicast_hops
from .routing import DELIVER, Children, Deliver, Forward, Message, candidate_list, mabravo_d_step, mabravo_r_children
from .sim import ExperimentConfig, RunRecord, build_cdf, run_experiment, run_network, verify_run
from .voronoi import LocalVision, Site, VoronoiDiagram, WorldBoundary, build_diagram, local_vision

__version__ = "0.1.0"

__all__ = [
    "AreaOfInterest", "aoi_members", "cell_in_aoi", "interest_geometry", "make_aoi", "site_in_aoi",
    "InvalidInputError", "MabravoError", "NotFoundError", "PreconditionError",
    "ProtocolMisuseError", "TopologyInconsistencyError", "TtlExpiredError",
    "Box", "ConvexPolygon", "Point", "gift_wrap", "set_tolerance", "tolerance",
    "duality_reference", "oracle_aoicast_tree", "oracle_unicast_hops",
    "DELIVER", "Children", "Deliver", "Forward", "Message",
    "candidate_list", "mabravo_d_step", "mabravo_r_children",
    "ExperimentConfig", "RunRecord", "build_cdf", "run_experiment", "run_network", "verify_run",
    "LocalVision", "Site", "VoronoiDiagram", "WorldBoundary", "build_diagram", "local_vision",
]
