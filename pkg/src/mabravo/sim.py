"""Seeded network generation, protocol runs, post-hoc checks and metrics.

Randomness is numpy's PCG64 seeded through ``SeedSequence``: network ``k``
of an experiment draws from ``SeedSequence([master_seed, k])``, split into
one stream for the topology and AoI and one for route endpoints. A
network's content therefore depends only on ``(master_seed, k)``.
"""

from __future__ import annotations

import bisect
import logging
import math
from collections import Counter, deque
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Iterator, Sequence

import numpy as np

from . import geometry as geo
from .aoi import AreaOfInterest, aoi_members, make_aoi
from .errors import InvalidInputError, MabravoError
from .geometry import Box, Point
from .oracle import duality_reference, oracle_aoicast_tree, oracle_unicast_hops
from .routing import CompetitorGuard, Deliver, Message, mabravo_d_step, mabravo_r_children
from .voronoi import LocalVision, Site, SiteId, VoronoiDiagram, build_diagram, local_vision

log = logging.getLogger(__name__)

AOI_SUBBOX_FRACTION = 0.5
MAX_AOI_RETRIES = 100
MAX_SITE_RETRIES = 100
MAX_POINT_RETRIES = 10_000

CHECK_NAMES = (
    "exactly-once-delivery",
    "no-outside-delivery",
    "message-count-optimal",
    "duality-consistency",
    "unicast-reaches-destination",
    "unicast-monotonicity",
    "unicast-in-aoi-confinement",
)


@dataclass(frozen=True)
class ExperimentConfig:
    num_sites: int
    aoi_seed_points: int
    routes_per_network: int = 1
    num_networks: int = 1
    master_seed: int = 0
    world: Box = Box()

    def __post_init__(self) -> None:
        for name in ("num_sites", "aoi_seed_points", "routes_per_network", "num_networks"):
            v = getattr(self, name)
            if not isinstance(v, (int, np.integer)) or v < 1:
                raise InvalidInputError(f"{name} must be a positive integer, got {v!r}")
        if self.aoi_seed_points < 3:
            raise InvalidInputError("an AoI needs at least 3 seed points")
        if not 0 <= self.master_seed < 2**64:
            raise InvalidInputError("master_seed must fit in 64 unsigned bits")


def network_streams(master_seed: int, network_index: int) -> tuple[np.random.Generator, np.random.Generator]:
    topo, routes = np.random.SeedSequence([master_seed, network_index]).spawn(2)
    return np.random.default_rng(topo), np.random.default_rng(routes)


class Network:
    """A static diagram plus AoI, with memoized local visions and membership."""

    def __init__(self, diagram: VoronoiDiagram, aoi: AreaOfInterest):
        self.diagram = diagram
        self.aoi = aoi
        self._visions: dict[SiteId, LocalVision] = {}

    @cached_property
    def members(self) -> frozenset[SiteId]:
        return aoi_members(self.diagram, self.aoi)

    def vision(self, s: SiteId) -> LocalVision:
        v = self._visions.get(s)
        if v is None:
            v = self._visions[s] = local_vision(self.diagram, s)
        return v


def _uniform_points(rng: np.random.Generator, n: int, lo: Sequence[float], hi: Sequence[float]) -> list[Point]:
    xy = rng.uniform(lo, hi, size=(n, 2))
    return [Point(x, y) for x, y in xy.tolist()]


def generate_network(rng: np.random.Generator, config: ExperimentConfig) -> Network:
    w = config.world
    for attempt in range(MAX_SITE_RETRIES):
        pts = _uniform_points(rng, config.num_sites, (w.xmin, w.ymin), (w.xmax, w.ymax))
        # uniform() is half-open; a draw on the lower edge is redrawn
        for i, p in enumerate(pts):
            while not w.strictly_contains(p):
                p = _uniform_points(rng, 1, (w.xmin, w.ymin), (w.xmax, w.ymax))[0]
            pts[i] = p
        try:
            diagram = build_diagram([Site(i, p) for i, p in enumerate(pts)], w)
            break
        except InvalidInputError as exc:
            # an eps-short side or near-duplicate; redraw the whole site set
            log.info("site draw %d rejected: %s", attempt, exc)
    else:
        raise InvalidInputError("could not draw a non-degenerate site set")

    mx = w.width * (1 - AOI_SUBBOX_FRACTION) / 2
    my = w.height * (1 - AOI_SUBBOX_FRACTION) / 2
    lo, hi = (w.xmin + mx, w.ymin + my), (w.xmax - mx, w.ymax - my)
    for _ in range(MAX_AOI_RETRIES):
        try:
            aoi = make_aoi(_uniform_points(rng, config.aoi_seed_points, lo, hi))
            break
        except InvalidInputError:
            continue
    else:
        raise InvalidInputError("could not draw a non-degenerate AoI")
    return Network(diagram, aoi)


def sample_point_in_aoi(rng: np.random.Generator, aoi: AreaOfInterest) -> Point:
    x0, y0, x1, y1 = aoi.bbox
    for _ in range(MAX_POINT_RETRIES):
        x, y = rng.uniform((x0, y0), (x1, y1)).tolist()
        p = Point(x, y)
        if aoi.contains(p):
            return p
    raise InvalidInputError("rejection sampling inside the AoI did not terminate")


# --------------------------------------------------------------------------
# runs

@dataclass
class UnicastResult:
    source: Point
    dest: Point
    route: list[SiteId]
    delivered: bool
    failure: str | None = None

    @property
    def hops(self) -> int:
        return len(self.route) - 1


@dataclass
class AoicastResult:
    root_point: Point
    root: SiteId
    receive_counts: dict[SiteId, int]
    parent: dict[SiteId, SiteId]
    edges: list[tuple[SiteId, SiteId]]
    violations: list[str] = field(default_factory=list)

    @property
    def messages_sent(self) -> int:
        return len(self.edges)

    def depths(self) -> dict[SiteId, int]:
        depth = {self.root: 0}
        queue = deque([self.root])
        children: dict[SiteId, list[SiteId]] = {}
        for c, p in self.parent.items():
            children.setdefault(p, []).append(c)
        while queue:
            u = queue.popleft()
            for c in children.get(u, ()):
                if c not in depth:
                    depth[c] = depth[u] + 1
                    queue.append(c)
        return depth

    def average_depth(self) -> float:
        depth = self.depths()
        return sum(depth.values()) / len(depth)


def _vision_getter(diagram: VoronoiDiagram, vision: Callable[[SiteId], LocalVision] | None):
    return vision or (lambda s: local_vision(diagram, s))


def run_unicast(
    diagram: VoronoiDiagram,
    aoi: AreaOfInterest,
    source: Sequence[float],
    dest: Sequence[float],
    *,
    vision: Callable[[SiteId], LocalVision] | None = None,
    ttl: int | None = None,
) -> UnicastResult:
    """Route from the owner of ``source`` toward ``dest`` with MABRAVO_D steps."""
    source, dest = geo.as_point(source), geo.as_point(dest)
    get = _vision_getter(diagram, vision)
    cur = diagram.owner_of(source)
    msg = Message(dest, aoi, len(diagram.sites) if ttl is None else ttl)
    route = [cur]
    while True:
        try:
            step = mabravo_d_step(get(cur), dest, aoi)
        except MabravoError as exc:
            return UnicastResult(source, dest, route, False, f"{type(exc).__name__}: {exc}")
        if isinstance(step, Deliver):
            return UnicastResult(source, dest, route, True)
        if msg.ttl == 0:
            return UnicastResult(source, dest, route, False, "ttl exhausted")
        msg = msg.forwarded()
        cur = step.next
        route.append(cur)


def run_aoicast(
    diagram: VoronoiDiagram,
    aoi: AreaOfInterest,
    root_point: Sequence[float],
    *,
    members: frozenset[SiteId] | None = None,
    vision: Callable[[SiteId], LocalVision] | None = None,
    guard: CompetitorGuard = "candidate",
) -> AoicastResult:
    """Flood an AoI-cast from the owner of ``root_point`` with MABRAVO_R steps.

    Every transmission is counted. A site is processed on its first
    reception only; repeats and deliveries outside the AoI are recorded in
    ``violations``.
    """
    root_point = geo.as_point(root_point)
    members = aoi_members(diagram, aoi) if members is None else members
    get = _vision_getter(diagram, vision)
    root = diagram.owner_of(root_point)
    counts: Counter[SiteId] = Counter({root: 1})
    parent: dict[SiteId, SiteId] = {}
    edges: list[tuple[SiteId, SiteId]] = []
    violations: list[str] = []
    queue = deque([root])
    while queue:
        u = queue.popleft()
        try:
            kids = mabravo_r_children(get(u), root_point, aoi, guard=guard).children
        except MabravoError as exc:
            violations.append(f"site {u}: {type(exc).__name__}: {exc}")
            continue
        for c in kids:
            edges.append((u, c))
            counts[c] += 1
            if counts[c] == 1:
                parent[c] = u
                if c not in members:
                    violations.append(f"site {c} outside the AoI received the message")
                queue.append(c)
            else:
                violations.append(f"site {c} received the message {counts[c]} times")
    return AoicastResult(root_point, root, dict(counts), parent, edges, violations)


# --------------------------------------------------------------------------
# checks

@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str = ""


@dataclass
class RunArtifacts:
    unicast: UnicastResult
    aoicast: AoicastResult


def verify_run(
    artifacts: RunArtifacts,
    diagram: VoronoiDiagram,
    aoi: AreaOfInterest,
    *,
    members: frozenset[SiteId] | None = None,
    vision: Callable[[SiteId], LocalVision] | None = None,
) -> list[CheckResult]:
    members = aoi_members(diagram, aoi) if members is None else members
    get = _vision_getter(diagram, vision)
    uni, cast = artifacts.unicast, artifacts.aoicast
    results = []

    def check(name: str, ok: bool, detail: str = "") -> None:
        results.append(CheckResult(name, bool(ok), "" if ok else detail))

    counts = cast.receive_counts
    received = set(counts)
    dup = sorted(s for s, n in counts.items() if n != 1)
    missing = sorted(members - received)
    check("exactly-once-delivery", not dup and not missing, f"repeated={dup[:5]} missing={missing[:5]}")
    outside = sorted(received - members)
    check("no-outside-delivery", not outside, f"outside={outside[:5]}")
    want = len(members) - 1
    check("message-count-optimal", cast.messages_sent == want, f"sent={cast.messages_sent} optimal={want}")
    try:
        ref = duality_reference(diagram, aoi, cast.root_point, members=members, vision=get)
        ref_edges = {(p, c) for c, p in ref.items()}
        got = set(cast.edges)
        check("duality-consistency", ref_edges == got,
              f"extra={sorted(got - ref_edges)[:5]} absent={sorted(ref_edges - got)[:5]}")
    except MabravoError as exc:
        check("duality-consistency", False, f"{type(exc).__name__}: {exc}")

    owner = diagram.owner_of(uni.dest)
    check("unicast-reaches-destination", uni.delivered and uni.route[-1] == owner,
          uni.failure or f"ended at {uni.route[-1]}, owner is {owner}")
    dists = [geo.distance(diagram.position(s), uni.dest) for s in uni.route]
    bad = [i for i in range(1, len(dists)) if not dists[i] < dists[i - 1]]
    check("unicast-monotonicity", not bad, f"non-decreasing hops at {bad[:5]}")
    strays = [s for s in uni.route if s not in members]
    check("unicast-in-aoi-confinement", not strays, f"outside relays {strays[:5]}")
    return results


# --------------------------------------------------------------------------
# records

@dataclass(frozen=True)
class RunRecord:
    network_index: int
    route_index: int
    start_site: SiteId
    end_site_or_root: SiteId
    total_sites: int
    aoi_sites: int
    oracle_unicast_hops: int
    oracle_avg_depth: float
    mabravo_r_avg_depth: float
    mabravo_d_hops: int
    messages_sent: int
    violations: tuple[str, ...] = ()
    verified: bool = True
    max_receive_count: int = 1
    received_sites: int = 0

    @property
    def checks_passed(self) -> bool:
        return self.verified and not self.violations


def run_route(
    network: Network,
    source: Point,
    dest: Point,
    network_index: int = 0,
    route_index: int = 0,
    *,
    verify: bool = True,
    guard: CompetitorGuard = "candidate",
) -> tuple[RunRecord, RunArtifacts]:
    """One unicast from ``source`` to ``dest`` and one AoI-cast rooted at ``dest``."""
    d, aoi, members = network.diagram, network.aoi, network.members
    uni = run_unicast(d, aoi, source, dest, vision=network.vision)
    cast = run_aoicast(d, aoi, dest, members=members, vision=network.vision, guard=guard)
    start, end = uni.route[0], cast.root
    tree = oracle_aoicast_tree(d, aoi, end, members=members)
    violations: list[str] = []
    artifacts = RunArtifacts(uni, cast)
    if verify:
        for r in verify_run(artifacts, d, aoi, members=members, vision=network.vision):
            if not r.passed:
                violations.append(f"{r.name}: {r.detail}")
    record = RunRecord(
        network_index=network_index,
        route_index=route_index,
        start_site=start,
        end_site_or_root=end,
        total_sites=len(d.sites),
        aoi_sites=len(members),
        oracle_unicast_hops=oracle_unicast_hops(d, aoi, start, end, members=members),
        oracle_avg_depth=tree.average_depth(),
        mabravo_r_avg_depth=cast.average_depth(),
        mabravo_d_hops=uni.hops,
        messages_sent=cast.messages_sent,
        violations=tuple(violations),
        verified=verify,
        max_receive_count=max(cast.receive_counts.values()),
        received_sites=len(cast.receive_counts),
    )
    return record, artifacts


def run_network(
    config: ExperimentConfig,
    network_index: int,
    *,
    verify: bool = True,
    guard: CompetitorGuard = "candidate",
) -> list[RunRecord]:
    topo_rng, route_rng = network_streams(config.master_seed, network_index)
    net = generate_network(topo_rng, config)
    records = []
    for r in range(config.routes_per_network):
        src = sample_point_in_aoi(route_rng, net.aoi)
        dst = sample_point_in_aoi(route_rng, net.aoi)
        rec, _ = run_route(net, src, dst, network_index, r, verify=verify, guard=guard)
        records.append(rec)
    log.debug("network %d: %d routes, %d AoI sites", network_index, len(records), len(net.members))
    return records


def _run_network_task(args) -> list[RunRecord]:
    config, k, verify, guard = args
    return run_network(config, k, verify=verify, guard=guard)


def _init_worker(eps: float) -> None:
    geo.set_tolerance(eps)


def run_experiment(
    config: ExperimentConfig,
    *,
    verify: bool = True,
    guard: CompetitorGuard = "candidate",
    jobs: int = 1,
) -> Iterator[RunRecord]:
    """All records in (network, route) order, optionally computed in parallel."""
    if jobs <= 1:
        for k in range(config.num_networks):
            yield from run_network(config, k, verify=verify, guard=guard)
        return
    from concurrent.futures import ProcessPoolExecutor

    tasks = [(config, k, verify, guard) for k in range(config.num_networks)]
    eps = geo.current_tolerance().eps
    with ProcessPoolExecutor(max_workers=jobs, initializer=_init_worker, initargs=(eps,)) as pool:
        for records in pool.map(_run_network_task, tasks):
            yield from records


# --------------------------------------------------------------------------
# distributions

@dataclass(frozen=True)
class Cdf:
    """Right-continuous empirical CDF."""

    values: tuple[float, ...]
    probabilities: tuple[float, ...]

    def __call__(self, x: float) -> float:
        return self.evaluate(x)

    def evaluate(self, x: float) -> float:
        n = len(self.values)
        return bisect.bisect_right(self.values, x) / n

    def quantile(self, p: float) -> float:
        """Smallest sample value v with evaluate(v) >= p."""
        if not 0 < p <= 1:
            raise InvalidInputError("quantile level must be in (0, 1]")
        n = len(self.values)
        return self.values[max(0, math.ceil(p * n - 1e-12) - 1)]

    def steps(self) -> list[tuple[float, float]]:
        """Distinct values with the cumulative probability reached at each."""
        out: list[tuple[float, float]] = []
        for v, p in zip(self.values, self.probabilities):
            if out and out[-1][0] == v:
                out[-1] = (v, p)
            else:
                out.append((v, p))
        return out


def build_cdf(samples: Sequence[float]) -> Cdf:
    vals = sorted(float(x) for x in samples)
    if not vals:
        raise InvalidInputError("a CDF needs at least one sample")
    n = len(vals)
    return Cdf(tuple(vals), tuple((i + 1) / n for i in range(n)))
