"""Box-clipped Voronoi tessellation by per-cell half-plane clipping.

Each cell starts as the world box and is cut by the bisector against every
other site, nearest first. Once the next site is farther than twice the
cell's current radius its bisector provably misses the cell, so the loop
stops early; the result is the same as clipping against all sites.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Sequence, Union

import numpy as np

from . import geometry as geo
from .errors import InvalidInputError, NotFoundError
from .geometry import Box, ConvexPolygon, Point, Segment

SiteId = int


class WorldBoundary:
    """Sentinel standing for "no site": a box side, never a SiteId.

    One instance exists per box side so that consecutive box edges in a
    labelled ring stay distinguishable; they all compare unequal to every
    SiteId and are recognised with ``is_world``.
    """

    __slots__ = ("side",)
    _sides: dict[str, "WorldBoundary"] = {}

    def __new__(cls, side: str = "any") -> "WorldBoundary":
        inst = cls._sides.get(side)
        if inst is None:
            inst = super().__new__(cls)
            inst.side = side
            cls._sides[side] = inst
        return inst

    def __repr__(self) -> str:
        return f"WorldBoundary({self.side!r})"

    def __reduce__(self):
        return (WorldBoundary, (self.side,))


WORLD_SIDES = tuple(WorldBoundary(s) for s in ("west", "north", "east", "south"))
Neighbor = Union[SiteId, WorldBoundary]


def is_world(x: object) -> bool:
    return isinstance(x, WorldBoundary)


@dataclass(frozen=True)
class Site:
    id: SiteId
    position: Point

    def __post_init__(self) -> None:
        if not isinstance(self.id, (int, np.integer)) or isinstance(self.id, bool) or self.id < 0:
            raise InvalidInputError(f"site id must be a non-negative integer, got {self.id!r}")
        object.__setattr__(self, "id", int(self.id))
        object.__setattr__(self, "position", geo.as_point(self.position))


@dataclass(frozen=True)
class CellVertex:
    position: Point
    # the two other owners meeting here (sites and/or WorldBoundary sides)
    incident: frozenset

    @property
    def on_world_boundary(self) -> bool:
        return any(is_world(x) for x in self.incident)

    def third_site(self, neighbor: SiteId) -> SiteId | None:
        """Owner other than ``neighbor`` meeting at this vertex, if it is a site."""
        rest = [x for x in self.incident if x != neighbor]
        if len(rest) == 1 and not is_world(rest[0]):
            return rest[0]
        return None


@dataclass(frozen=True)
class BoundaryEntry:
    side: Segment
    neighbor: Neighbor
    start_vertex: CellVertex
    end_vertex: CellVertex


@dataclass(frozen=True)
class VoronoiCell:
    owner: SiteId
    polygon: ConvexPolygon
    boundary: tuple[BoundaryEntry, ...]

    @cached_property
    def _by_neighbor(self) -> dict[SiteId, BoundaryEntry]:
        return {e.neighbor: e for e in self.boundary if not is_world(e.neighbor)}

    @property
    def neighbors(self) -> list[SiteId]:
        return [e.neighbor for e in self.boundary if not is_world(e.neighbor)]

    def entry(self, neighbor: SiteId) -> BoundaryEntry:
        try:
            return self._by_neighbor[neighbor]
        except KeyError:
            raise NotFoundError(f"site {neighbor} is not a neighbor of {self.owner}") from None

    def shared_vertices(self, neighbor: SiteId) -> tuple[CellVertex, CellVertex]:
        e = self.entry(neighbor)
        return e.start_vertex, e.end_vertex

    def common_neighbors(self, neighbor: SiteId) -> tuple[SiteId | None, SiteId | None]:
        """Third sites at the start and end of the side shared with ``neighbor``."""
        start, end = self.shared_vertices(neighbor)
        return start.third_site(neighbor), end.third_site(neighbor)


@dataclass(frozen=True, eq=False)
class VoronoiDiagram:
    sites: tuple[Site, ...]
    world: Box
    cells: dict[SiteId, VoronoiCell] = field(repr=False)

    @cached_property
    def _index(self) -> dict[SiteId, Site]:
        return {s.id: s for s in self.sites}

    @cached_property
    def _coords(self) -> np.ndarray:
        return np.array([s.position for s in self.sites], dtype=float)

    def site(self, s: SiteId) -> Site:
        try:
            return self._index[s]
        except KeyError:
            raise NotFoundError(f"unknown site {s}") from None

    def position(self, s: SiteId) -> Point:
        return self.site(s).position

    def cell(self, s: SiteId) -> VoronoiCell:
        try:
            return self.cells[s]
        except KeyError:
            raise NotFoundError(f"unknown site {s}") from None

    def neighbors(self, s: SiteId) -> list[SiteId]:
        return self.cell(s).neighbors

    def owner_of(self, p: Sequence[float]) -> SiteId:
        """Nearest site to ``p`` (lowest id on exact ties)."""
        d = ((self._coords - np.asarray(p, dtype=float)) ** 2).sum(axis=1)
        return self.sites[int(np.argmin(d))].id


def _box_ring(world: Box) -> tuple[list[Point], list]:
    return list(world.corners()), list(WORLD_SIDES)


def _cell_ring(
    center: int, coords: np.ndarray, ids: Sequence[SiteId], world: Box
) -> tuple[list[Point], list]:
    verts, labels = _box_ring(world)
    px, py = coords[center]
    d2 = ((coords - coords[center]) ** 2).sum(axis=1)
    order = np.argsort(d2, kind="stable")
    eps = geo._EPS
    r2 = max((x - px) ** 2 + (y - py) ** 2 for x, y in verts)
    for j in order.tolist():
        if j == center:
            continue
        reach = math.sqrt(d2[j]) / 2 - eps
        if reach > 0 and reach * reach > r2:
            break
        qx, qy = coords[j]
        dx, dy = qx - px, qy - py
        norm = math.hypot(dx, dy)
        a, b = dx / norm, dy / norm
        c = a * (px + qx) / 2 + b * (py + qy) / 2
        res = geo.clip_labeled(verts, labels, a, b, c, ids[j])
        if res is None:
            continue
        verts, labels = res
        if len(verts) < 3:
            raise InvalidInputError(f"cell of site {ids[center]} collapsed; sites too close")
        r2 = max((x - px) ** 2 + (y - py) ** 2 for x, y in verts)
    return verts, labels


def _make_cell(owner: SiteId, verts: list[Point], labels: list) -> VoronoiCell:
    n = len(verts)
    k = min(range(n), key=verts.__getitem__)
    verts = verts[k:] + verts[:k]
    labels = labels[k:] + labels[:k]
    corners = [
        CellVertex(verts[i], frozenset((labels[i - 1], labels[i]))) for i in range(n)
    ]
    entries = tuple(
        BoundaryEntry(
            side=Segment(verts[i], verts[(i + 1) % n]),
            neighbor=labels[i],
            start_vertex=corners[i],
            end_vertex=corners[(i + 1) % n],
        )
        for i in range(n)
    )
    return VoronoiCell(owner, ConvexPolygon._trusted(verts), entries)


def _validate_sites(sites: Sequence[Site], world: Box) -> np.ndarray:
    if not sites:
        raise InvalidInputError("at least one site is required")
    ids = [s.id for s in sites]
    if len(set(ids)) != len(ids):
        raise InvalidInputError("site ids must be unique")
    for s in sites:
        if not world.strictly_contains(s.position):
            raise InvalidInputError(f"site {s.id} at {s.position} is not strictly inside the world box")
    coords = np.array([s.position for s in sites], dtype=float)
    if len(sites) > 1:
        # sort-and-scan is enough to find eps-duplicates along x
        order = np.lexsort((coords[:, 1], coords[:, 0]))
        eps = geo._EPS
        xs = coords[order]
        for a in range(len(xs)):
            b = a + 1
            while b < len(xs) and xs[b, 0] - xs[a, 0] <= eps:
                if math.hypot(*(xs[b] - xs[a])) <= eps:
                    raise InvalidInputError(
                        f"sites {ids[order[a]]} and {ids[order[b]]} share a position"
                    )
                b += 1
    return coords


def build_diagram(sites: Iterable[Site], world: Box = Box(), *, validate: bool = True) -> VoronoiDiagram:
    """Voronoi tessellation of ``sites`` clipped to ``world``.

    With ``validate`` the neighbor relation is checked for symmetry and each
    interior vertex for exactly three incident cells; cocircular inputs
    that break this raise ``InvalidInputError``.
    """
    sites = tuple(sites)
    coords = _validate_sites(sites, world)
    ids = [s.id for s in sites]
    cells: dict[SiteId, VoronoiCell] = {}
    for i, sid in enumerate(ids):
        verts, labels = _cell_ring(i, coords, ids, world)
        cells[sid] = _make_cell(sid, verts, labels)
    diagram = VoronoiDiagram(sites, world, cells)
    if validate:
        check_topology(diagram)
    return diagram


def check_topology(diagram: VoronoiDiagram) -> None:
    nbrs = {s: set(c.neighbors) for s, c in diagram.cells.items()}
    for s, ns in nbrs.items():
        for t in ns:
            if s not in nbrs.get(t, ()):
                raise InvalidInputError(f"asymmetric adjacency {s}->{t}; degenerate input")
    for s, cell in diagram.cells.items():
        for e in cell.boundary:
            inc = [x for x in e.end_vertex.incident if not is_world(x)]
            if len(inc) == 2 and inc[1] not in nbrs[inc[0]]:
                raise InvalidInputError(
                    f"vertex {e.end_vertex.position} of {s} has more than 3 incident cells"
                )


def neighbors(diagram: VoronoiDiagram, s: SiteId) -> list[SiteId]:
    """Owners of cells sharing a side with ``s``, in circular (clockwise) order."""
    return diagram.neighbors(s)


def shared_vertices(diagram: VoronoiDiagram, i: SiteId, j: SiteId) -> tuple[CellVertex, CellVertex]:
    return diagram.cell(i).shared_vertices(j)


@dataclass(frozen=True, eq=False)
class LocalVision:
    """What one site can compute from its own and its neighbors' positions.

    ``cell`` (the center's own cell) is built eagerly from the known sites
    only; the full local ``diagram`` is built on first access.
    """

    center: Site
    known: tuple[Site, ...]
    world: Box
    cell: VoronoiCell

    @cached_property
    def diagram(self) -> VoronoiDiagram:
        return build_diagram((self.center,) + self.known, self.world, validate=False)

    @cached_property
    def positions(self) -> dict[SiteId, Point]:
        out = {s.id: s.position for s in self.known}
        out[self.center.id] = self.center.position
        return out

    @property
    def neighbors(self) -> list[SiteId]:
        return self.cell.neighbors

    def cell_of(self, s: SiteId) -> VoronoiCell:
        """Local-vision cell of a known site (V_{s, center})."""
        if s == self.center.id:
            return self.cell
        return self.diagram.cell(s)


def local_vision(diagram: VoronoiDiagram, s: SiteId) -> LocalVision:
    center = diagram.site(s)
    known = tuple(diagram.site(j) for j in diagram.neighbors(s))
    local_sites = (center,) + known
    coords = np.array([x.position for x in local_sites], dtype=float)
    ids = [x.id for x in local_sites]
    verts, labels = _cell_ring(0, coords, ids, diagram.world)
    return LocalVision(center, known, diagram.world, _make_cell(s, verts, labels))
