"""Convex areas of interest and the per-cell sets derived from them.

For a cell and a target point ``d`` this computes the cell/AoI
intersection, its shadow toward ``d`` (one incremental-hull step), the
cell sides facing ``d`` and the neighbors across those sides.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Sequence

from . import geometry as geo
from .errors import InvalidInputError, PreconditionError
from .geometry import ConvexPolygon, EmptyRegion, Point, Region, Segment
from .voronoi import SiteId, VoronoiCell, VoronoiDiagram, is_world


@dataclass(frozen=True)
class AreaOfInterest:
    region: ConvexPolygon

    def contains(self, p: Sequence[float]) -> bool:
        return geo.point_in_polygon(p, self.region)

    @cached_property
    def segments(self) -> tuple[Segment, ...]:
        return tuple(self.region.segments())

    @cached_property
    def bbox(self) -> tuple[float, float, float, float]:
        return self.region.bbox()

    @property
    def vertices(self) -> tuple[Point, ...]:
        return self.region.vertices


def make_aoi(seed_points: Iterable[Sequence[float]]) -> AreaOfInterest:
    """Gift-wrap seed points into a clockwise convex AoI."""
    pts = list(seed_points)
    if len(pts) < 3:
        raise InvalidInputError("an AoI needs at least 3 seed points")
    hull = geo.gift_wrap(pts)
    if isinstance(hull, EmptyRegion):
        raise InvalidInputError("AoI seed points are degenerate (collinear or coincident)")
    return AreaOfInterest(hull)


def _bbox_disjoint(a, b, eps) -> bool:
    return a[2] < b[0] - eps or b[2] < a[0] - eps or a[3] < b[1] - eps or b[3] < a[1] - eps


def cell_in_aoi(cell: VoronoiCell, aoi: AreaOfInterest) -> bool:
    """Closed test: does the cell touch or overlap the AoI?"""
    if _bbox_disjoint(cell.polygon.bbox(), aoi.bbox, geo._EPS):
        return False
    return bool(geo.intersect_convex(cell.polygon, aoi.region))


def site_in_aoi(diagram: VoronoiDiagram, aoi: AreaOfInterest, s: SiteId) -> bool:
    return cell_in_aoi(diagram.cell(s), aoi)


def aoi_members(diagram: VoronoiDiagram, aoi: AreaOfInterest) -> frozenset[SiteId]:
    return frozenset(s for s, cell in diagram.cells.items() if cell_in_aoi(cell, aoi))


@dataclass(frozen=True)
class InterestGeometry:
    cell_owner: SiteId
    destination: Point
    i_region: Region
    z_region: Region
    s_segments: tuple[Segment, ...]
    n_candidates: tuple[SiteId, ...]


def interest_geometry(cell: VoronoiCell, aoi: AreaOfInterest, d: Sequence[float]) -> InterestGeometry:
    d = geo.as_point(d)
    if not aoi.contains(d):
        raise PreconditionError(f"target {d} is outside the AoI")
    ring = [e.side.a for e in cell.boundary]
    labels = [e.neighbor for e in cell.boundary]
    verts, vlabels = geo.intersect_labeled(ring, labels, aoi.region, tag="aoi")
    i_region = geo._classify(verts)
    if not i_region:
        raise PreconditionError(f"cell of site {cell.owner} does not meet the AoI")
    if geo._inside_ring(d, verts):
        return InterestGeometry(cell.owner, d, i_region, i_region, (), ())

    z_region = geo.gift_wrap(list(verts) + [d])
    n = len(verts)
    eps = geo._EPS
    facing = []
    for k in range(n):
        a, b = verts[k], verts[(k + 1) % n]
        if geo.distance(a, b) > eps and geo._line_offset(a, b, d) > eps:
            facing.append(k)
    # rotate so the facing edges form one run in ring order
    if facing and len(facing) < n:
        first = next(k for k in facing if (k - 1) % n not in facing)
        facing.sort(key=lambda k: (k - first) % n)
    segments: list[Segment] = []
    candidates: list[SiteId] = []
    for k in facing:
        lab = vlabels[k]
        # AoI edges never face a point inside the AoI; world sides carry no site
        if isinstance(lab, tuple) or is_world(lab):
            continue
        segments.append(Segment(verts[k], verts[(k + 1) % n]))
        if lab not in candidates:
            candidates.append(lab)
    return InterestGeometry(cell.owner, d, i_region, z_region, tuple(segments), tuple(candidates))
