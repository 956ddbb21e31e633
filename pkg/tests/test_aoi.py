from __future__ import annotations

import numpy as np
import pytest

from mabravo import geometry as geo
from mabravo.aoi import aoi_members, cell_in_aoi, interest_geometry, make_aoi, site_in_aoi
from mabravo.errors import InvalidInputError, NotFoundError, PreconditionError
from mabravo.geometry import Box, ConvexPolygon
from mabravo.voronoi import Site, build_diagram, is_world, local_vision

from oracles import brute_hull, inside_many, sat_intersects

WORLD = Box()


def _network(seed: int, n: int, k: int = 10):
    rng = np.random.default_rng(seed)
    xy = rng.uniform(0, 1000, size=(n, 2))
    d = build_diagram([Site(i, (float(x), float(y))) for i, (x, y) in enumerate(xy)])
    aoi = make_aoi(rng.uniform(250, 750, size=(k, 2)).tolist())
    return d, aoi, rng


def _points_in(rng, verts, k: int) -> np.ndarray:
    v = np.asarray(verts)
    lo, hi = v.min(axis=0), v.max(axis=0)
    out = np.empty((0, 2))
    while len(out) < k:
        xy = rng.uniform(lo, hi, size=(4 * k, 2))
        out = np.vstack([out, xy[inside_many(xy, verts)]])
    return out[:k]


def _exit_sides(cell, xy: np.ndarray, d) -> set:
    """Side label through which each segment xy[i] -> d leaves the cell."""
    ring = [e.side.a for e in cell.boundary] + [cell.boundary[0].side.a]
    a = np.asarray(ring[:-1])
    b = np.asarray(ring[1:])
    d = np.asarray(d, dtype=float)

    def off(p):  # positive when left of a clockwise edge, i.e. outside
        return (b[:, 0] - a[:, 0]) * (p[..., 1:2] - a[:, 1]) - (b[:, 1] - a[:, 1]) * (p[..., 0:1] - a[:, 0])

    fp, fd = off(xy), off(d[None, :])
    leaving = fd > 0
    with np.errstate(divide="ignore", invalid="ignore"):
        t = np.where(leaving, -fp / (fd - fp), np.inf)
    k = t.argmin(axis=1)
    return {cell.boundary[i].neighbor for i in set(k.tolist())}


# -- make_aoi / membership ------------------------------------------------------

def test_make_aoi_square():
    aoi = make_aoi([(100, 100), (100, 200), (200, 200), (200, 100)])
    assert aoi.region.area == pytest.approx(10_000)
    assert geo.signed_area(aoi.vertices) < 0


def test_make_aoi_seeded_points_hull():
    rng = np.random.default_rng(21)
    seeds = rng.uniform(250, 750, size=(10, 2)).tolist()
    aoi = make_aoi(seeds)
    assert len(aoi.vertices) <= 10
    assert {tuple(v) for v in aoi.vertices} == brute_hull(seeds)
    assert all(aoi.contains(p) for p in seeds)


@pytest.mark.parametrize("pts", [[(0, 0), (1, 1), (2, 2)], [(1, 1), (2, 2)]])
def test_make_aoi_degenerate(pts):
    with pytest.raises(InvalidInputError):
        make_aoi(pts)


def test_site_inside_aoi_is_member():
    d, aoi, _ = _network(3, 100)
    for s in d.cells:
        if aoi.contains(d.position(s)):
            assert site_in_aoi(d, aoi, s)


def test_single_site_network_is_always_member():
    d = build_diagram([Site(0, (10, 990))])
    aoi = make_aoi([(400, 400), (400, 450), (450, 420)])
    assert site_in_aoi(d, aoi, 0)
    with pytest.raises(NotFoundError):
        site_in_aoi(d, aoi, 1)


def test_membership_matches_separating_axis_oracle():
    eps = geo.current_tolerance().eps
    for seed in range(5):
        d, aoi, _ = _network(40 + seed, 150)
        want = {s for s, c in d.cells.items() if sat_intersects(c.polygon.vertices, aoi.vertices, eps)}
        assert aoi_members(d, aoi) == want


def test_touching_cell_counts_as_member():
    d = build_diagram([Site(0, (250, 500)), Site(1, (750, 500))])
    # AoI lies in cell 1 and touches the bisector x = 500 along an edge
    aoi = make_aoi([(500, 400), (500, 600), (700, 500)])
    assert cell_in_aoi(d.cell(0), aoi)
    aoi2 = make_aoi([(500 + 1e-3, 400), (500 + 1e-3, 600), (700, 500)])
    assert not cell_in_aoi(d.cell(0), aoi2)


# Seven sites in [0,100]^2: A = 1 sees C = 6 crossing the AoI, but
# globally C's cell stops short of it.
FALSE_MEMBER = [(14, 23), (85, 66), (81, 63), (42, 51), (58, 83), (44, 85), (60, 80)]
FALSE_MEMBER_AOI = [(22, 62), (50, 62), (33, 26)]


def test_local_vision_can_misjudge_membership():
    d = build_diagram([Site(i, p) for i, p in enumerate(FALSE_MEMBER)], Box(0, 0, 100, 100))
    aoi = make_aoi(FALSE_MEMBER_AOI)
    a, c = 1, 6
    lv = local_vision(d, a)
    assert c in lv.neighbors
    assert cell_in_aoi(lv.cell_of(c), aoi)
    assert not site_in_aoi(d, aoi, c)
    assert lv.cell_of(c).polygon.area > d.cell(c).polygon.area


# -- interest geometry ------------------------------------------------------------

def test_delivery_case_has_no_segments():
    d, aoi, rng = _network(5, 60)
    s = next(s for s in sorted(d.cells) if aoi.contains(d.position(s)))
    ig = interest_geometry(d.cell(s), aoi, d.position(s))
    assert ig.s_segments == () and ig.n_candidates == ()
    assert ig.z_region is ig.i_region


def test_square_cell_faces_right_side():
    world = Box(-100, -100, 100, 100)
    sites = [Site(0, (5, 5)), Site(1, (15, 5)), Site(2, (-5, 5)), Site(3, (5, 15)), Site(4, (5, -5))]
    d = build_diagram(sites, world)
    cell = d.cell(0)
    assert {(round(v.x, 9), round(v.y, 9)) for v in cell.polygon.vertices} == {(0, 0), (0, 10), (10, 10), (10, 0)}
    aoi = make_aoi([(-50, -50), (-50, 50), (50, 50), (50, -50)])
    ig = interest_geometry(cell, aoi, (20, 5))
    assert ig.n_candidates == (1,)
    (seg,) = ig.s_segments
    assert {(round(p.x, 9), round(p.y, 9)) for p in (seg.a, seg.b)} == {(10, 0), (10, 10)}


def test_preconditions():
    d, aoi, _ = _network(6, 100)
    inside = next(s for s in sorted(d.cells) if site_in_aoi(d, aoi, s))
    outside = next(s for s in sorted(d.cells) if not site_in_aoi(d, aoi, s))
    target = aoi.region.centroid()
    with pytest.raises(PreconditionError):
        interest_geometry(d.cell(outside), aoi, target)
    with pytest.raises(PreconditionError):
        interest_geometry(d.cell(inside), aoi, (5, 5))


def _facing_sides(cell, i_verts, d) -> set:
    """Cell sides of I from which a small step toward d leaves the cell."""
    d = np.asarray(d, dtype=float)
    ring = np.asarray([e.side.a for e in cell.boundary])
    out = set()
    n = len(i_verts)
    for k in range(n):
        a, b = np.asarray(i_verts[k]), np.asarray(i_verts[(k + 1) % n])
        for t in np.linspace(0.05, 0.95, 19):
            p = a + t * (b - a)
            q = p + 1e-4 * (d - p)
            if inside_many(q[None, :], ring)[0]:
                continue
            side = min(cell.boundary, key=lambda e: geo.point_segment_distance(p, e.side.a, e.side.b))
            if geo.point_segment_distance(p, side.side.a, side.side.b) < 1e-7:
                out.add(side.neighbor)
    return out


@pytest.mark.parametrize("seed", range(4))
def test_candidates_match_exit_side_oracle(seed):
    d, aoi, rng = _network(60 + seed, 20, k=8)
    members = sorted(aoi_members(d, aoi))
    checked = 0
    for s in members:
        for target in _points_in(rng, aoi.vertices, 3).tolist():
            ig = interest_geometry(d.cell(s), aoi, target)
            if ig.z_region is ig.i_region:
                continue
            xy = _points_in(rng, ig.i_region.vertices, 10_000) if isinstance(ig.i_region, ConvexPolygon) \
                else np.asarray(ig.i_region.vertices)
            # area sampling can miss grazing slivers, so it only bounds from below
            crossed = _exit_sides(d.cell(s), xy, target)
            assert not any(is_world(x) for x in crossed)
            assert crossed <= set(ig.n_candidates)
            assert set(ig.n_candidates) == _facing_sides(d.cell(s), ig.i_region.vertices, target)
            checked += 1
    assert checked > 10


def test_interest_geometry_invariants():
    eps = geo.current_tolerance().eps
    for seed in range(3):
        d, aoi, rng = _network(80 + seed, 60)
        for s in sorted(aoi_members(d, aoi)):
            cell = d.cell(s)
            target = tuple(_points_in(rng, aoi.vertices, 1)[0])
            ig = interest_geometry(cell, aoi, target)
            i_verts = ig.i_region.vertices
            for v in i_verts:
                assert geo.point_in_polygon(v, cell.polygon) and aoi.contains(v)
            if ig.z_region is ig.i_region:
                assert geo.point_in_polygon(target, cell.polygon)
                continue
            z = ig.z_region
            assert isinstance(z, ConvexPolygon)
            assert geo.point_in_polygon(target, z)
            assert all(geo.point_in_polygon(v, z) for v in i_verts)
            # convexity: midpoints of random pairs stay inside
            pts = _points_in(rng, z.vertices, 40)
            for p, q in zip(pts[:20], pts[20:]):
                assert geo.point_in_polygon((p + q) / 2, z)
            # S is one chain and non-empty when the target is outside the cell
            segs = ig.s_segments
            assert segs and ig.n_candidates
            for x, y in zip(segs, segs[1:]):
                assert geo.distance(x.b, y.a) <= eps
            for j in ig.n_candidates:
                assert j in cell.neighbors
                assert geo.distance(target, d.position(j)) < geo.distance(target, d.position(s))
                side = cell.entry(j).side
                assert any(geo.segment_intersects_segment(side, g) for g in segs)
