"""Planar primitives with a single process-wide absolute tolerance.

All polygons are clockwise (interior on the right of every directed edge)
and every membership or intersection predicate is closed: a point within
``eps`` of a boundary counts as on it.
"""

from __future__ import annotations

import math
from contextlib import contextmanager
from dataclasses import dataclass
from typing import Hashable, Iterable, Iterator, NamedTuple, Sequence, Union

from .errors import InvalidInputError

__all__ = [
    "DEFAULT_EPS",
    "Box",
    "Contact",
    "ConvexPolygon",
    "DirectedLine",
    "EMPTY",
    "EmptyRegion",
    "Point",
    "Region",
    "Segment",
    "Tolerance",
    "angle_at",
    "clip_labeled",
    "clip_polygon_by_halfplane",
    "current_tolerance",
    "distance",
    "distance_sq",
    "gift_wrap",
    "intersect_convex",
    "point_in_polygon",
    "point_segment_distance",
    "polygon_area",
    "segment_intersects_segment",
    "set_tolerance",
    "signed_area",
    "tolerance",
    "tolerance_for_box",
]


# --------------------------------------------------------------------------
# tolerance policy

@dataclass(frozen=True)
class Tolerance:
    eps: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.eps) and self.eps > 0):
            raise InvalidInputError(f"tolerance must be a positive finite number, got {self.eps!r}")


# 1e-9 times the diagonal of the default [0, 1000]^2 world
DEFAULT_EPS = 1e-9 * math.hypot(1000.0, 1000.0)
_EPS = DEFAULT_EPS


def current_tolerance() -> Tolerance:
    return Tolerance(_EPS)


def set_tolerance(eps: float | Tolerance) -> Tolerance:
    """Replace the process-wide tolerance; returns the previous one."""
    global _EPS
    new = eps if isinstance(eps, Tolerance) else Tolerance(float(eps))
    old = Tolerance(_EPS)
    _EPS = new.eps
    return old


@contextmanager
def tolerance(eps: float | Tolerance) -> Iterator[Tolerance]:
    old = set_tolerance(eps)
    try:
        yield current_tolerance()
    finally:
        set_tolerance(old)


def tolerance_for_box(box: "Box") -> Tolerance:
    return Tolerance(1e-9 * box.diagonal)


# --------------------------------------------------------------------------
# values

class _XY(NamedTuple):
    x: float
    y: float


class Point(_XY):
    """Immutable finite point; also usable as a plain ``(x, y)`` tuple."""

    __slots__ = ()

    def __new__(cls, x: float, y: float) -> "Point":
        x = float(x)
        y = float(y)
        if not (math.isfinite(x) and math.isfinite(y)):
            raise InvalidInputError(f"non-finite coordinate ({x!r}, {y!r})")
        return super().__new__(cls, x, y)

    def __repr__(self) -> str:
        return f"Point({self.x!r}, {self.y!r})"


def _pt(x: float, y: float) -> Point:
    # internal constructor for values that are finite by construction
    return tuple.__new__(Point, (x, y))


def as_point(p: Sequence[float]) -> Point:
    return p if type(p) is Point else Point(p[0], p[1])


@dataclass(frozen=True)
class Segment:
    a: Point
    b: Point

    def __post_init__(self) -> None:
        object.__setattr__(self, "a", as_point(self.a))
        object.__setattr__(self, "b", as_point(self.b))
        if distance(self.a, self.b) <= _EPS:
            raise InvalidInputError(f"degenerate segment {self.a}-{self.b}")

    @property
    def length(self) -> float:
        return distance(self.a, self.b)

    def midpoint(self) -> Point:
        return _pt((self.a.x + self.b.x) / 2, (self.a.y + self.b.y) / 2)


@dataclass(frozen=True)
class DirectedLine:
    """Oriented line; clipping keeps the closed half-plane on its right."""

    point: Point
    direction: tuple[float, float]

    def __post_init__(self) -> None:
        object.__setattr__(self, "point", as_point(self.point))
        dx, dy = (float(v) for v in self.direction)
        norm = math.hypot(dx, dy)
        if not math.isfinite(norm) or norm == 0.0:
            raise InvalidInputError("direction must be a non-zero finite vector")
        object.__setattr__(self, "direction", (dx, dy))

    def halfplane(self) -> tuple[float, float, float]:
        """Unit-normal form ``(a, b, c)`` of the kept side ``a*x + b*y <= c``."""
        dx, dy = self.direction
        norm = math.hypot(dx, dy)
        a, b = -dy / norm, dx / norm
        return a, b, a * self.point.x + b * self.point.y


class EmptyRegion:
    """The empty set; falsy, and a singleton (``EMPTY``)."""

    _instance: "EmptyRegion | None" = None

    def __new__(cls) -> "EmptyRegion":
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __bool__(self) -> bool:
        return False

    def __repr__(self) -> str:
        return "EMPTY"

    @property
    def vertices(self) -> tuple[Point, ...]:
        return ()


EMPTY = EmptyRegion()


@dataclass(frozen=True)
class Contact:
    """Non-empty intersection of zero area: a touching point or segment."""

    points: tuple[Point, ...]

    @property
    def vertices(self) -> tuple[Point, ...]:
        return self.points


@dataclass(frozen=True)
class ConvexPolygon:
    """Clockwise convex polygon with at least three strictly convex vertices."""

    vertices: tuple[Point, ...]

    def __post_init__(self) -> None:
        verts = tuple(as_point(v) for v in self.vertices)
        object.__setattr__(self, "vertices", verts)
        n = len(verts)
        if n < 3:
            raise InvalidInputError("a convex polygon needs at least 3 vertices")
        for i in range(n):
            if _turn(verts[i - 1], verts[i], verts[(i + 1) % n]) >= -_EPS:
                raise InvalidInputError(
                    f"vertex {i} is not a strict clockwise turn: {verts[i]}"
                )

    @classmethod
    def _trusted(cls, vertices: Iterable[Point]) -> "ConvexPolygon":
        obj = object.__new__(cls)
        object.__setattr__(obj, "vertices", tuple(vertices))
        return obj

    def edges(self) -> list[tuple[Point, Point]]:
        v = self.vertices
        return [(v[i], v[(i + 1) % len(v)]) for i in range(len(v))]

    def segments(self) -> list[Segment]:
        return [Segment(a, b) for a, b in self.edges()]

    @property
    def area(self) -> float:
        return polygon_area(self.vertices)

    def centroid(self) -> Point:
        v = self.vertices
        return _pt(sum(p.x for p in v) / len(v), sum(p.y for p in v) / len(v))

    def bbox(self) -> tuple[float, float, float, float]:
        xs = [p.x for p in self.vertices]
        ys = [p.y for p in self.vertices]
        return min(xs), min(ys), max(xs), max(ys)


Region = Union[ConvexPolygon, Contact, EmptyRegion]


@dataclass(frozen=True)
class Box:
    """Axis-aligned world rectangle."""

    xmin: float = 0.0
    ymin: float = 0.0
    xmax: float = 1000.0
    ymax: float = 1000.0

    def __post_init__(self) -> None:
        vals = (self.xmin, self.ymin, self.xmax, self.ymax)
        if not all(math.isfinite(v) for v in vals):
            raise InvalidInputError("world box must be finite")
        if not (self.xmax > self.xmin and self.ymax > self.ymin):
            raise InvalidInputError("world box is degenerate")

    @property
    def width(self) -> float:
        return self.xmax - self.xmin

    @property
    def height(self) -> float:
        return self.ymax - self.ymin

    @property
    def diagonal(self) -> float:
        return math.hypot(self.width, self.height)

    @property
    def area(self) -> float:
        return self.width * self.height

    def corners(self) -> tuple[Point, Point, Point, Point]:
        """Clockwise, starting at the lower-left corner."""
        return (
            Point(self.xmin, self.ymin),
            Point(self.xmin, self.ymax),
            Point(self.xmax, self.ymax),
            Point(self.xmax, self.ymin),
        )

    def polygon(self) -> ConvexPolygon:
        return ConvexPolygon._trusted(self.corners())

    def strictly_contains(self, p: Sequence[float]) -> bool:
        return self.xmin < p[0] < self.xmax and self.ymin < p[1] < self.ymax


# --------------------------------------------------------------------------
# scalar predicates

def distance(p: Sequence[float], q: Sequence[float]) -> float:
    return math.hypot(p[0] - q[0], p[1] - q[1])


def distance_sq(p: Sequence[float], q: Sequence[float]) -> float:
    dx = p[0] - q[0]
    dy = p[1] - q[1]
    return dx * dx + dy * dy


def _cross(o, a, b) -> float:
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])


def _line_offset(a, b, p) -> float:
    """Signed distance of p from line a->b; positive means left of it."""
    return _cross(a, b, p) / math.hypot(b[0] - a[0], b[1] - a[1])


def _turn(a, b, c) -> float:
    # signed distance of c from line a->b
    return _line_offset(a, b, c)


def angle_at(vertex: Sequence[float], ray_to_1: Sequence[float], ray_to_2: Sequence[float]) -> float:
    """Unsigned angle in ``[0, pi]`` between rays vertex->ray_to_1 and vertex->ray_to_2."""
    ux, uy = ray_to_1[0] - vertex[0], ray_to_1[1] - vertex[1]
    vx, vy = ray_to_2[0] - vertex[0], ray_to_2[1] - vertex[1]
    if math.hypot(ux, uy) <= _EPS or math.hypot(vx, vy) <= _EPS:
        raise InvalidInputError("ray endpoint coincides with the angle vertex")
    return math.atan2(abs(ux * vy - uy * vx), ux * vx + uy * vy)


def signed_area(vertices: Sequence[Sequence[float]]) -> float:
    """Shoelace area; negative for clockwise rings."""
    n = len(vertices)
    s = 0.0
    for i in range(n):
        x0, y0 = vertices[i]
        x1, y1 = vertices[(i + 1) % n]
        s += x0 * y1 - x1 * y0
    return s / 2


def polygon_area(vertices: Sequence[Sequence[float]]) -> float:
    return abs(signed_area(vertices))


def point_segment_distance(p: Sequence[float], a: Sequence[float], b: Sequence[float]) -> float:
    dx, dy = b[0] - a[0], b[1] - a[1]
    ll = dx * dx + dy * dy
    if ll == 0.0:
        return distance(p, a)
    t = ((p[0] - a[0]) * dx + (p[1] - a[1]) * dy) / ll
    t = min(1.0, max(0.0, t))
    return math.hypot(p[0] - (a[0] + t * dx), p[1] - (a[1] + t * dy))


def segment_intersects_segment(s1: Segment, s2: Segment) -> bool:
    """Closed-segment intersection test; touching endpoints count."""
    return _segments_touch(s1.a, s1.b, s2.a, s2.b)


def _segments_touch(a, b, c, d) -> bool:
    eps = _EPS
    o1 = _line_offset(a, b, c)
    o2 = _line_offset(a, b, d)
    o3 = _line_offset(c, d, a)
    o4 = _line_offset(c, d, b)
    if ((o1 > eps and o2 < -eps) or (o1 < -eps and o2 > eps)) and (
        (o3 > eps and o4 < -eps) or (o3 < -eps and o4 > eps)
    ):
        return True
    return (
        point_segment_distance(c, a, b) <= eps
        or point_segment_distance(d, a, b) <= eps
        or point_segment_distance(a, c, d) <= eps
        or point_segment_distance(b, c, d) <= eps
    )


def point_in_polygon(pt: Sequence[float], poly: ConvexPolygon) -> bool:
    """True iff pt is inside the clockwise polygon or within eps of its boundary."""
    return _inside_ring(pt, poly.vertices)


def _inside_ring(pt, verts) -> bool:
    eps = _EPS
    px, py = pt[0], pt[1]
    n = len(verts)
    for i in range(n):
        ax, ay = verts[i - 1]
        bx, by = verts[i]
        ex, ey = bx - ax, by - ay
        # left of a clockwise edge is outside
        if ex * (py - ay) - ey * (px - ax) > eps * math.hypot(ex, ey):
            return False
    return True


# --------------------------------------------------------------------------
# hulls

def gift_wrap(points: Iterable[Sequence[float]]) -> ConvexPolygon | EmptyRegion:
    """Jarvis march; returns the clockwise hull or EMPTY when it has no area."""
    pts: list[Point] = []
    for p in points:
        p = as_point(p)
        if all(distance(p, q) > _EPS for q in pts):
            pts.append(p)
    if len(pts) < 3:
        return EMPTY
    eps = _EPS
    start = min(pts)
    far = max(pts, key=lambda q: distance_sq(start, q))
    # everything within eps of one line: no area, and the march below could
    # bounce between two points when start is not extreme along that line
    if all(abs(_line_offset(start, far, r)) <= eps for r in pts):
        return EMPTY
    hull = [start]
    seen = {start}
    cur = start
    for _ in range(len(pts)):
        best = None
        for r in pts:
            if r is cur:
                continue
            if best is None:
                best = r
                continue
            off = _line_offset(cur, best, r)
            if off > eps:
                best = r
            elif off >= -eps:
                # collinear: keep the farthest point ahead of cur
                ahead = (best[0] - cur[0]) * (r[0] - cur[0]) + (best[1] - cur[1]) * (r[1] - cur[1]) > 0
                if ahead and distance_sq(cur, r) > distance_sq(cur, best):
                    best = r
        if best is start:
            break
        if best in seen:
            # near-collinear wobble; close the ring where it repeats
            hull = hull[hull.index(best):]
            break
        hull.append(best)
        seen.add(best)
        cur = best
    else:
        raise InvalidInputError("hull construction did not close; input is ill-conditioned")
    hull = _drop_collinear(hull)
    if len(hull) < 3:
        return EMPTY
    return ConvexPolygon._trusted(hull)


def _drop_collinear(ring: list[Point]) -> list[Point]:
    changed = True
    while changed and len(ring) >= 3:
        changed = False
        n = len(ring)
        for i in range(n):
            if _turn(ring[i - 1], ring[i], ring[(i + 1) % n]) >= -_EPS:
                del ring[i]
                changed = True
                break
    return ring


# --------------------------------------------------------------------------
# clipping

def clip_labeled(
    verts: Sequence[Point],
    labels: Sequence[Hashable],
    a: float,
    b: float,
    c: float,
    new_label: Hashable,
) -> tuple[list[Point], list[Hashable]] | None:
    """Clip a labelled clockwise ring by the closed half-plane ``a*x + b*y <= c``.

    ``(a, b)`` must be a unit vector. ``labels[i]`` tags the edge from
    ``verts[i]`` to ``verts[i + 1]``; edges created along the clip line get
    ``new_label``. Returns ``None`` when nothing is cut away. The result may
    be degenerate (fewer than three points) when the ring only touches the
    half-plane.
    """
    eps = _EPS
    s = [a * x + b * y - c for x, y in verts]
    if max(s) <= eps:
        return None
    out_v: list[Point] = []
    out_l: list[Hashable] = []
    n = len(verts)
    for i in range(n):
        j = i + 1 if i + 1 < n else 0
        sp, sq = s[i], s[j]
        if sp <= eps:
            out_v.append(verts[i])
            if sq <= eps:
                out_l.append(labels[i])
            elif sp < -eps:
                out_l.append(labels[i])
                out_v.append(_interp(verts[i], verts[j], sp, sq))
                out_l.append(new_label)
            else:
                out_l.append(new_label)
        elif sq < -eps:
            out_v.append(_interp(verts[i], verts[j], sp, sq))
            out_l.append(labels[i])
    # an on-line vertex between two clip-line edges is collinear
    merged = True
    while merged and len(out_v) >= 3:
        merged = False
        for k in range(len(out_v)):
            if out_l[k - 1] == out_l[k]:
                del out_v[k]
                del out_l[k]
                merged = True
                break
    return out_v, out_l


def _interp(p, q, sp, sq) -> Point:
    t = sp / (sp - sq)
    return _pt(p[0] + t * (q[0] - p[0]), p[1] + t * (q[1] - p[1]))


def _edge_halfplane(u, v) -> tuple[float, float, float]:
    # closed right side of u->v as unit-normal a*x + b*y <= c
    ex, ey = v[0] - u[0], v[1] - u[1]
    norm = math.hypot(ex, ey)
    a, b = -ey / norm, ex / norm
    return a, b, a * u[0] + b * u[1]


def _classify(points: Sequence[Point]) -> Region:
    if not points:
        return EMPTY
    if len(points) >= 3:
        area = polygon_area(points)
        diameter = max(distance(p, q) for p in points for q in points)
        if 2 * area > _EPS * diameter:
            ring = _drop_collinear(list(points))
            if len(ring) >= 3:
                return ConvexPolygon._trusted(ring)
    uniq: list[Point] = []
    for p in points:
        if all(distance(p, q) > _EPS for q in uniq):
            uniq.append(p)
    if len(uniq) > 2:
        # sliver: keep its two extreme points
        a, b = max(((p, q) for p in uniq for q in uniq), key=lambda pq: distance_sq(*pq))
        uniq = [a, b]
    return Contact(tuple(uniq))


def clip_polygon_by_halfplane(poly: ConvexPolygon, boundary: DirectedLine) -> ConvexPolygon | EmptyRegion:
    """Part of ``poly`` on the right of ``boundary`` (points within eps kept)."""
    a, b, c = boundary.halfplane()
    verts = poly.vertices
    res = clip_labeled(verts, range(len(verts)), a, b, c, -1)
    if res is None:
        return poly
    region = _classify(res[0])
    return region if isinstance(region, ConvexPolygon) else EMPTY


def intersect_convex(p: ConvexPolygon, q: ConvexPolygon) -> Region:
    """Closed intersection of two convex polygons.

    A touching point or edge is reported as a ``Contact`` (truthy) rather
    than ``EMPTY``.
    """
    pts, _ = intersect_labeled(p.vertices, range(len(p.vertices)), q)
    return _classify(pts)


def intersect_labeled(
    verts: Sequence[Point], labels: Sequence[Hashable], clipper: ConvexPolygon, tag: Hashable = "clip"
) -> tuple[list[Point], list[Hashable]]:
    """Clip a labelled ring by every edge of ``clipper``.

    Edges contributed by clipper edge ``k`` are labelled ``(tag, k)``.
    """
    verts = list(verts)
    labels = list(labels)
    cv = clipper.vertices
    for k in range(len(cv)):
        a, b, c = _edge_halfplane(cv[k], cv[(k + 1) % len(cv)])
        res = clip_labeled(verts, labels, a, b, c, (tag, k))
        if res is not None:
            verts, labels = res
            if not verts:
                break
    return verts, labels
