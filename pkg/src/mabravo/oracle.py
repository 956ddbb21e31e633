"""Global-knowledge references used to check and score the local protocols."""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import Callable, Sequence

from .aoi import AreaOfInterest, aoi_members
from .errors import InvalidInputError, TopologyInconsistencyError
from .routing import Deliver, mabravo_d_step
from .voronoi import LocalVision, SiteId, VoronoiDiagram, local_vision


@dataclass(frozen=True)
class OracleTree:
    root: SiteId
    parent: dict[SiteId, SiteId]
    depth: dict[SiteId, int]

    @property
    def edge_count(self) -> int:
        return len(self.parent)

    def average_depth(self) -> float:
        return sum(self.depth.values()) / len(self.depth)


def _members(diagram, aoi, members):
    return aoi_members(diagram, aoi) if members is None else members


def _bfs(diagram: VoronoiDiagram, members: frozenset[SiteId], root: SiteId) -> tuple[dict, dict]:
    parent: dict[SiteId, SiteId] = {}
    depth = {root: 0}
    queue = deque([root])
    while queue:
        u = queue.popleft()
        for v in sorted(diagram.neighbors(u)):
            if v in members and v not in depth:
                depth[v] = depth[u] + 1
                parent[v] = u
                queue.append(v)
    return parent, depth


def oracle_aoicast_tree(
    diagram: VoronoiDiagram,
    aoi: AreaOfInterest,
    root: SiteId,
    *,
    members: frozenset[SiteId] | None = None,
) -> OracleTree:
    """Breadth-first tree over in-AoI sites, frontier expanded by ascending id."""
    members = _members(diagram, aoi, members)
    if root not in members:
        raise InvalidInputError(f"root {root} is outside the AoI")
    parent, depth = _bfs(diagram, members, root)
    if len(depth) != len(members):
        missing = sorted(members - depth.keys())[:5]
        raise TopologyInconsistencyError(f"in-AoI sites unreachable from {root}: {missing}...")
    return OracleTree(root, parent, depth)


def oracle_unicast_hops(
    diagram: VoronoiDiagram,
    aoi: AreaOfInterest,
    source: SiteId,
    target: SiteId,
    *,
    members: frozenset[SiteId] | None = None,
) -> int:
    """Fewest overlay hops between two in-AoI sites using in-AoI relays only."""
    members = _members(diagram, aoi, members)
    for s in (source, target):
        if s not in members:
            raise InvalidInputError(f"site {s} is outside the AoI")
    if source == target:
        return 0
    depth = {source: 0}
    queue = deque([source])
    while queue:
        u = queue.popleft()
        for v in diagram.neighbors(u):
            if v in members and v not in depth:
                if v == target:
                    return depth[u] + 1
                depth[v] = depth[u] + 1
                queue.append(v)
    raise TopologyInconsistencyError(f"no in-AoI path from {source} to {target}")


def duality_reference(
    diagram: VoronoiDiagram,
    aoi: AreaOfInterest,
    d: Sequence[float],
    *,
    members: frozenset[SiteId] | None = None,
    vision: Callable[[SiteId], LocalVision] | None = None,
) -> dict[SiteId, SiteId]:
    """Expected AoI-cast parent of every in-AoI site: its own unicast next hop toward ``d``."""
    members = _members(diagram, aoi, members)
    get = vision or (lambda s: local_vision(diagram, s))
    out: dict[SiteId, SiteId] = {}
    for s in sorted(members):
        step = mabravo_d_step(get(s), d, aoi)
        if not isinstance(step, Deliver):
            out[s] = step.next
    return out
