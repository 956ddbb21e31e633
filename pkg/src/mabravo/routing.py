"""MABRAVO decision procedures, each reading a single site's local vision.

``mabravo_d_step`` picks the unicast next hop toward a point. The
AoI-cast step ``mabravo_r_children`` selects every neighbor whose own
unicast step toward the root would choose the current site, which yields
one message per AoI site.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Literal, NamedTuple, Sequence, Union

from . import geometry as geo
from .aoi import AreaOfInterest, cell_in_aoi
from .errors import ProtocolMisuseError, TopologyInconsistencyError, TtlExpiredError
from .geometry import Point
from .voronoi import LocalVision, SiteId, is_world

# angles closer than this are equal and the lower id wins
ANGLE_TOL = 1e-9

CompetitorGuard = Literal["candidate", "literal"]


@dataclass(frozen=True)
class Message:
    destination_or_root: Point
    aoi: AreaOfInterest
    ttl: int
    payload: bytes = b""

    def __post_init__(self) -> None:
        if self.ttl < 0:
            raise ValueError("ttl must be non-negative")

    def forwarded(self) -> "Message":
        """Copy for the next hop; refuses to forward an expired message."""
        if self.ttl == 0:
            raise TtlExpiredError("ttl exhausted")
        return replace(self, ttl=self.ttl - 1)


@dataclass(frozen=True)
class Deliver:
    pass


@dataclass(frozen=True)
class Forward:
    next: SiteId


@dataclass(frozen=True)
class Children:
    children: tuple[SiteId, ...]


DELIVER = Deliver()
RoutingDecision = Union[Deliver, Forward, Children]


class _Side(NamedTuple):
    neighbor: SiteId
    position: Point
    start: Point
    end: Point
    start_in: bool
    end_in: bool
    start_third: SiteId | None
    end_third: SiteId | None
    # some AoI edge meets this side (only evaluated when both ends are outside)
    crosses_aoi: bool


class _VisionTable(NamedTuple):
    center_in_aoi: bool
    sides: tuple[_Side, ...]


def _vertex_in_aoi(vertex, aoi: AreaOfInterest) -> bool:
    # box-side vertices are never in the AoI, which sits strictly inside the box
    if vertex.on_world_boundary:
        return False
    return aoi.contains(vertex.position)


def _table(vision: LocalVision, aoi: AreaOfInterest) -> _VisionTable:
    cache = vision.__dict__.setdefault("_aoi_tables", {})
    tab = cache.get(aoi)
    if tab is not None:
        return tab
    pos = vision.positions
    sides = []
    for e in vision.cell.boundary:
        if is_world(e.neighbor):
            continue
        a, b = e.start_vertex.position, e.end_vertex.position
        a_in = _vertex_in_aoi(e.start_vertex, aoi)
        b_in = _vertex_in_aoi(e.end_vertex, aoi)
        sides.append(
            _Side(
                e.neighbor,
                pos[e.neighbor],
                a,
                b,
                a_in,
                b_in,
                e.start_vertex.third_site(e.neighbor),
                e.end_vertex.third_site(e.neighbor),
                not (a_in or b_in) and _crosses_aoi_boundary(a, b, aoi),
            )
        )
    tab = _VisionTable(cell_in_aoi(vision.cell, aoi), tuple(sides))
    cache[aoi] = tab
    return tab


def _checked(vision: LocalVision, d: Sequence[float], aoi: AreaOfInterest) -> tuple[Point, _VisionTable]:
    d = geo.as_point(d)
    if not aoi.contains(d):
        raise ProtocolMisuseError(f"point {d} is outside the AoI")
    tab = _table(vision, aoi)
    if not tab.center_in_aoi:
        raise ProtocolMisuseError(f"site {vision.center.id} is outside the AoI")
    return d, tab


def _crosses_aoi_boundary(a: Point, b: Point, aoi: AreaOfInterest) -> bool:
    eps = geo._EPS
    x0, y0, x1, y1 = aoi.bbox
    if (max(a[0], b[0]) < x0 - eps or min(a[0], b[0]) > x1 + eps
            or max(a[1], b[1]) < y0 - eps or min(a[1], b[1]) > y1 + eps):
        return False
    return any(geo._segments_touch(q.a, q.b, a, b) for q in aoi.segments)


def _better(angle_a: float, id_a: SiteId, angle_b: float, id_b: SiteId) -> bool:
    """Strict (angle, id) order with angle equality under ANGLE_TOL."""
    if angle_a < angle_b - ANGLE_TOL:
        return True
    return abs(angle_a - angle_b) <= ANGLE_TOL and id_a < id_b


def candidate_list(vision: LocalVision, d: Sequence[float], aoi: AreaOfInterest) -> list[SiteId]:
    """Neighbors not farther from ``d`` that share a vertex inside the AoI."""
    d, tab = _checked(vision, d, aoi)
    dc = geo.distance(d, vision.center.position)
    return [
        s.neighbor
        for s in tab.sides
        if not dc < geo.distance(d, s.position) and (s.start_in or s.end_in)
    ]


def mabravo_d_step(vision: LocalVision, d: Sequence[float], aoi: AreaOfInterest) -> Deliver | Forward:
    """One unicast step at ``vision.center`` toward ``d``."""
    d, tab = _checked(vision, d, aoi)
    c = vision.center.position
    dc = geo.distance(d, c)
    dist = [geo.distance(d, s.position) for s in tab.sides]
    if all(dc < x for x in dist):
        return DELIVER

    cands = [
        s for s, ds in zip(tab.sides, dist) if not dc < ds and (s.start_in or s.end_in)
    ]
    if not cands:
        # the AoI crosses one side twice without containing its endpoints
        hits = [
            s.neighbor
            for s, ds in zip(tab.sides, dist)
            if ds < dc and s.crosses_aoi
        ]
        if not hits:
            raise TopologyInconsistencyError(
                f"site {vision.center.id}: no neighbor toward {d} inside the AoI"
            )
        if len(hits) > 1:
            raise TopologyInconsistencyError(
                f"site {vision.center.id}: several side-crossing next hops {hits}"
            )
        return Forward(hits[0])

    best, best_angle = None, 0.0
    for s in cands:
        a = geo.angle_at(c, d, s.position)
        if best is None or _better(a, s.neighbor, best_angle, best):
            best, best_angle = s.neighbor, a
    return Forward(best)


def mabravo_r_children(
    vision: LocalVision,
    d: Sequence[float],
    aoi: AreaOfInterest,
    *,
    guard: CompetitorGuard = "candidate",
) -> Children:
    """Neighbors the center must relay an AoI-cast rooted at ``d`` to.

    ``guard`` chooses who counts as a competing parent at a shared vertex
    in the AoI. ``"candidate"`` (default) admits a common neighbor ``k``
    when ``|k d| <= |j d|``, i.e. when the child ``j`` would itself list
    ``k`` as a unicast candidate. ``"literal"`` uses ``|k d| > |i d|``
    exactly as the published pseudocode prints it; it is kept for
    comparison and produces duplicate deliveries (see tests).
    """
    d, tab = _checked(vision, d, aoi)
    me = vision.center.id
    p_i = vision.center.position
    di = geo.distance(d, p_i)
    pos = vision.positions
    out: list[SiteId] = []
    for s in tab.sides:
        dj = geo.distance(d, s.position)
        if di > dj:
            continue
        if not s.start_in and not s.end_in:
            if s.crosses_aoi:
                out.append(s.neighbor)
            continue
        angle_i = None
        excluded = False
        for third, v_in in ((s.start_third, s.start_in), (s.end_third, s.end_in)):
            if third is None or not v_in:
                continue
            dk = geo.distance(d, pos[third])
            competes = dk > di if guard == "literal" else dk <= dj
            if not competes:
                continue
            if angle_i is None:
                angle_i = geo.angle_at(s.position, d, p_i)
            angle_k = geo.angle_at(s.position, d, pos[third])
            if _better(angle_k, third, angle_i, me):
                excluded = True
                break
        if not excluded:
            out.append(s.neighbor)
    return Children(tuple(out))
