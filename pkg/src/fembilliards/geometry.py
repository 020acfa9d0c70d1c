"""Billiard regions: exact descriptions, containment, areas and boundary polylines.

Every region is an immutable dataclass. Curved boundaries (circle arcs) are
polygonalized by *inscribed* chords, so the meshed domain is always a subset
of the true region.
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass

import numpy as np

__all__ = [
    "InvalidSpec",
    "BoundaryPolyline",
    "Region",
    "Circle",
    "RegularPolygon",
    "Polygon",
    "Rectangle",
    "Triangle",
    "EquilateralTriangle",
    "Stadium",
    "StarPolygon",
    "SectorCutDisk",
    "build_region",
    "parse_region",
    "contains",
    "boundary_polyline",
    "area",
    "shoelace_area",
    "MIN_ARC_SEGMENTS",
]

#: Minimum number of chords per full turn of any arc, whatever the tolerance.
MIN_ARC_SEGMENTS = 8

_ON_EDGE_RTOL = 1e-12


class InvalidSpec(ValueError):
    """Raised for region descriptions that violate their invariants."""


@dataclass(frozen=True)
class BoundaryPolyline:
    """Closed, counterclockwise vertex loop inscribed in a region boundary.

    ``vertices`` does not repeat the first vertex at the end. ``max_sagitta``
    is the largest chord-to-curve gap actually produced (0 for straight
    edged regions), always ``<= chord_tolerance``.
    """

    vertices: np.ndarray
    chord_tolerance: float
    max_sagitta: float = 0.0

    def __len__(self) -> int:
        return len(self.vertices)

    @property
    def segments(self) -> np.ndarray:
        n = len(self.vertices)
        return np.column_stack([np.arange(n), (np.arange(n) + 1) % n])

    def area(self) -> float:
        return shoelace_area(self.vertices)

    def edge_lengths(self) -> np.ndarray:
        d = np.roll(self.vertices, -1, axis=0) - self.vertices
        return np.hypot(d[:, 0], d[:, 1])


def shoelace_area(vertices) -> float:
    """Signed area of a closed vertex loop (positive when counterclockwise)."""
    v = np.asarray(vertices, dtype=float)
    x, y = v[:, 0], v[:, 1]
    return 0.5 * float(np.dot(x, np.roll(y, -1)) - np.dot(np.roll(x, -1), y))


def _arc_count(radius: float, span: float, chord_tolerance: float) -> int:
    """Number of equal chords over an arc so that every sagitta is within tolerance."""
    floor = math.ceil(MIN_ARC_SEGMENTS * span / (2 * math.pi) - 1e-9)
    ratio = chord_tolerance / radius
    if ratio >= 1.0:
        n = 1
    else:
        n = math.ceil(span / (2.0 * math.acos(1.0 - ratio)) - 1e-12)
    return max(n, floor, 1)


def _arc(center, radius, start, span, n, include_end=False) -> np.ndarray:
    count = n + 1 if include_end else n
    t = start + span * np.arange(count) / n
    return np.column_stack([center[0] + radius * np.cos(t), center[1] + radius * np.sin(t)])


def _sagitta(radius: float, span: float, n: int) -> float:
    return radius * (1.0 - math.cos(span / (2 * n)))


def _segment_distance(px, py, a, b):
    """Distance from points (px, py) to the segment a-b."""
    ax, ay = a
    bx, by = b
    dx, dy = bx - ax, by - ay
    ll = dx * dx + dy * dy
    t = np.clip(((px - ax) * dx + (py - ay) * dy) / ll, 0.0, 1.0)
    return np.hypot(px - ax - t * dx, py - ay - t * dy)


def _polygon_contains(vertices: np.ndarray, x, y):
    """Strict point-in-polygon test; points on an edge report False."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    inside = np.zeros(np.broadcast(x, y).shape, dtype=bool)
    on_edge = np.zeros_like(inside)
    scale = float(np.max(np.abs(vertices))) or 1.0
    n = len(vertices)
    for i in range(n):
        x0, y0 = vertices[i]
        x1, y1 = vertices[(i + 1) % n]
        crosses = (y0 > y) != (y1 > y)
        with np.errstate(divide="ignore", invalid="ignore"):
            xint = x0 + (y - y0) * (x1 - x0) / (y1 - y0)
        inside ^= crosses & (x < xint)
        on_edge |= _segment_distance(x, y, (x0, y0), (x1, y1)) <= _ON_EDGE_RTOL * scale
    return inside & ~on_edge


def _segments_intersect(p1, p2, p3, p4) -> bool:
    def orient(a, b, c):
        v = (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])
        return 0 if abs(v) < 1e-14 else (1 if v > 0 else -1)

    def on_seg(a, b, c):
        return min(a[0], b[0]) - 1e-14 <= c[0] <= max(a[0], b[0]) + 1e-14 and \
            min(a[1], b[1]) - 1e-14 <= c[1] <= max(a[1], b[1]) + 1e-14

    o1, o2 = orient(p1, p2, p3), orient(p1, p2, p4)
    o3, o4 = orient(p3, p4, p1), orient(p3, p4, p2)
    if o1 != o2 and o3 != o4:
        return True
    return (o1 == 0 and on_seg(p1, p2, p3)) or (o2 == 0 and on_seg(p1, p2, p4)) or \
        (o3 == 0 and on_seg(p3, p4, p1)) or (o4 == 0 and on_seg(p3, p4, p2))


def _check_simple(vertices: np.ndarray) -> None:
    n = len(vertices)
    for i in range(n):
        a, b = vertices[i], vertices[(i + 1) % n]
        if np.allclose(a, b, rtol=0, atol=1e-14):
            raise InvalidSpec("polygon has repeated consecutive vertices")
        for j in range(i + 1, n):
            if j == i or (j + 1) % n == i or j == (i + 1) % n:
                continue
            if _segments_intersect(a, b, vertices[j], vertices[(j + 1) % n]):
                raise InvalidSpec(f"polygon is not simple: edges {i} and {j} intersect")


def _positive(name: str, value: float) -> float:
    value = float(value)
    if not math.isfinite(value) or value <= 0:
        raise InvalidSpec(f"{name} must be a positive finite number, got {value!r}")
    return value


def _fmt(x: float) -> str:
    # shortest text that round-trips, without a trailing ".0"
    s = repr(float(x))
    return s[:-2] if s.endswith(".0") else s


class Region:
    """Common interface of every billiard region."""

    kind: str = "region"

    def area(self) -> float:
        raise NotImplementedError

    def contains(self, x, y):
        """True strictly inside; boundary points are outside (psi vanishes there)."""
        raise NotImplementedError

    def boundary_polyline(self, chord_tolerance: float) -> BoundaryPolyline:
        raise NotImplementedError

    def boundary_distance(self, x, y):
        """Distance from points to the exact boundary curve."""
        raise NotImplementedError

    def bbox(self) -> tuple[float, float, float, float]:
        """(xmin, xmax, ymin, ymax) of the exact region."""
        raise NotImplementedError

    def spec(self) -> str:
        """Canonical region-spec string; ``parse_region(r.spec()) == r``."""
        raise NotImplementedError

    def __str__(self) -> str:
        return self.spec()


@dataclass(frozen=True)
class Circle(Region):
    radius: float = 1.0
    kind = "circle"

    def __post_init__(self):
        object.__setattr__(self, "radius", _positive("radius", self.radius))

    def area(self) -> float:
        return math.pi * self.radius**2

    def contains(self, x, y):
        return np.asarray(x) ** 2 + np.asarray(y) ** 2 < self.radius**2

    def boundary_polyline(self, chord_tolerance: float) -> BoundaryPolyline:
        n = _arc_count(self.radius, 2 * math.pi, chord_tolerance)
        v = _arc((0.0, 0.0), self.radius, 0.0, 2 * math.pi, n)
        return BoundaryPolyline(v, chord_tolerance, _sagitta(self.radius, 2 * math.pi, n))

    def boundary_distance(self, x, y):
        return np.abs(np.hypot(x, y) - self.radius)

    def bbox(self):
        r = self.radius
        return (-r, r, -r, r)

    def spec(self) -> str:
        return f"circle r={_fmt(self.radius)}"


@dataclass(frozen=True)
class Polygon(Region):
    """Simple polygon given by its vertex list (reoriented to counterclockwise)."""

    vertices: tuple = ()
    kind = "polygon"

    def __post_init__(self):
        v = np.asarray(self.vertices, dtype=float)
        if v.ndim != 2 or v.shape[1] != 2 or len(v) < 3:
            raise InvalidSpec("polygon needs at least three (x, y) vertices")
        if not np.all(np.isfinite(v)):
            raise InvalidSpec("polygon vertices must be finite")
        _check_simple(v)
        a = shoelace_area(v)
        if abs(a) < 1e-14:
            raise InvalidSpec("polygon is degenerate (zero area)")
        if a < 0:
            v = v[::-1]
        object.__setattr__(self, "vertices", tuple(map(tuple, v.tolist())))

    @property
    def points(self) -> np.ndarray:
        return np.asarray(self.vertices, dtype=float)

    def area(self) -> float:
        return shoelace_area(self.points)

    def contains(self, x, y):
        return _polygon_contains(self.points, x, y)

    def boundary_polyline(self, chord_tolerance: float) -> BoundaryPolyline:
        return BoundaryPolyline(self.points.copy(), chord_tolerance, 0.0)

    def boundary_distance(self, x, y):
        v = self.points
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        d = np.full(np.broadcast(x, y).shape, np.inf)
        for i in range(len(v)):
            d = np.minimum(d, _segment_distance(x, y, v[i], v[(i + 1) % len(v)]))
        return d

    def bbox(self):
        v = self.points
        return (v[:, 0].min(), v[:, 0].max(), v[:, 1].min(), v[:, 1].max())

    def spec(self) -> str:
        return "polygon " + " ".join(f"({_fmt(x)},{_fmt(y)})" for x, y in self.vertices)


class RegularPolygon(Polygon):
    """Regular n-gon inscribed in a circle of radius ``circumradius``; one vertex points up."""

    kind = "ngon"

    def __init__(self, sides: int = 5, circumradius: float = 1.0):
        if int(sides) != sides or sides < 3:
            raise InvalidSpec(f"sides must be an integer >= 3, got {sides!r}")
        r = _positive("circumradius", circumradius)
        t = math.pi / 2 + 2 * math.pi * np.arange(int(sides)) / int(sides)
        object.__setattr__(self, "sides", int(sides))
        object.__setattr__(self, "circumradius", r)
        super().__init__(vertices=tuple(zip(r * np.cos(t), r * np.sin(t))))

    def area(self) -> float:
        n, r = self.sides, self.circumradius
        return 0.5 * n * r * r * math.sin(2 * math.pi / n)

    def spec(self) -> str:
        return f"ngon sides={self.sides} r={_fmt(self.circumradius)}"

    def __repr__(self) -> str:
        return f"RegularPolygon(sides={self.sides}, circumradius={self.circumradius})"

    def __eq__(self, other):
        return isinstance(other, RegularPolygon) and (self.sides, self.circumradius) == (
            other.sides, other.circumradius)

    __hash__ = Polygon.__hash__


class Rectangle(Polygon):
    """Axis-aligned rectangle [0, lx] x [0, ly]."""

    kind = "rectangle"

    def __init__(self, lx: float = 1.0, ly: float = 1.0):
        lx, ly = _positive("lx", lx), _positive("ly", ly)
        object.__setattr__(self, "lx", lx)
        object.__setattr__(self, "ly", ly)
        super().__init__(vertices=((0.0, 0.0), (lx, 0.0), (lx, ly), (0.0, ly)))

    def area(self) -> float:
        return self.lx * self.ly

    def spec(self) -> str:
        if self.lx == self.ly:
            return f"square side={_fmt(self.lx)}"
        return f"rectangle lx={_fmt(self.lx)} ly={_fmt(self.ly)}"

    def __repr__(self) -> str:
        return f"Rectangle(lx={self.lx}, ly={self.ly})"

    def __eq__(self, other):
        return isinstance(other, Rectangle) and (self.lx, self.ly) == (other.lx, other.ly)

    __hash__ = Polygon.__hash__


class Triangle(Polygon):
    kind = "triangle"

    def __init__(self, a, b, c):
        v = np.asarray([a, b, c], dtype=float)
        if v.shape != (3, 2):
            raise InvalidSpec("triangle needs three (x, y) vertices")
        if abs(shoelace_area(v)) < 1e-14:
            raise InvalidSpec("degenerate triangle (collinear vertices)")
        super().__init__(vertices=tuple(map(tuple, v)))

    def spec(self) -> str:
        return "triangle " + " ".join(f"({_fmt(x)},{_fmt(y)})" for x, y in self.vertices)

    def __repr__(self) -> str:
        return f"Triangle{self.vertices}"


class EquilateralTriangle(Polygon):
    """Equilateral triangle with horizontal base and centroid at the origin."""

    kind = "equilateral"

    def __init__(self, side: float = 1.0):
        a = _positive("side", side)
        object.__setattr__(self, "side", a)
        h = a / (2 * math.sqrt(3))
        super().__init__(vertices=((-a / 2, -h), (a / 2, -h), (0.0, 2 * h)))

    def area(self) -> float:
        return math.sqrt(3) / 4 * self.side**2

    def spec(self) -> str:
        return f"triangle equilateral side={_fmt(self.side)}"

    def __repr__(self) -> str:
        return f"EquilateralTriangle(side={self.side})"

    def __eq__(self, other):
        return isinstance(other, EquilateralTriangle) and self.side == other.side

    __hash__ = Polygon.__hash__


def default_inner_radius(points: int, outer_radius: float = 1.0) -> float:
    """Inner radius of the regular star polygon {points/2}.

    For five points this is outer/phi**2 (the golden pentagram), for six it is
    outer/sqrt(3).
    """
    if points < 5:
        raise InvalidSpec("stars with fewer than 5 points need an explicit inner radius")
    return outer_radius * math.cos(2 * math.pi / points) / math.cos(math.pi / points)


class StarPolygon(Polygon):
    """Star with ``points`` tips; vertices alternate outer/inner radius at equal angular steps."""

    kind = "star"

    def __init__(self, points: int = 5, outer_radius: float = 1.0, inner_radius: float | None = None):
        if int(points) != points or points < 3:
            raise InvalidSpec(f"points must be an integer >= 3, got {points!r}")
        points = int(points)
        ro = _positive("outer_radius", outer_radius)
        ri = default_inner_radius(points, ro) if inner_radius is None else _positive("inner_radius", inner_radius)
        if ri >= ro:
            raise InvalidSpec("inner_radius must be smaller than outer_radius")
        object.__setattr__(self, "points_count", points)
        object.__setattr__(self, "outer_radius", ro)
        object.__setattr__(self, "inner_radius", ri)
        k = np.arange(2 * points)
        t = math.pi / 2 + math.pi * k / points
        r = np.where(k % 2 == 0, ro, ri)
        super().__init__(vertices=tuple(zip(r * np.cos(t), r * np.sin(t))))

    def spec(self) -> str:
        return (f"star points={self.points_count} router={_fmt(self.outer_radius)} "
                f"rinner={_fmt(self.inner_radius)}")

    def tip_angle(self) -> float:
        """Interior angle at an outer vertex, in degrees."""
        v = self.points
        a, b, c = v[-1], v[0], v[1]
        u, w = a - b, c - b
        return math.degrees(math.acos(np.dot(u, w) / np.linalg.norm(u) / np.linalg.norm(w)))

    def __repr__(self) -> str:
        return (f"StarPolygon(points={self.points_count}, outer_radius={self.outer_radius}, "
                f"inner_radius={self.inner_radius})")

    def __eq__(self, other):
        return isinstance(other, StarPolygon) and (
            self.points_count, self.outer_radius, self.inner_radius) == (
            other.points_count, other.outer_radius, other.inner_radius)

    __hash__ = Polygon.__hash__


@dataclass(frozen=True)
class Stadium(Region):
    """Bunimovich stadium: a 2*half_length x 2*cap_radius rectangle with semicircular caps."""

    cap_radius: float = 1.0
    half_length: float = 1.0
    kind = "stadium"

    def __post_init__(self):
        object.__setattr__(self, "cap_radius", _positive("cap_radius", self.cap_radius))
        object.__setattr__(self, "half_length", _positive("half_length", self.half_length))

    def area(self) -> float:
        r, a = self.cap_radius, self.half_length
        return 4 * a * r + math.pi * r * r

    def contains(self, x, y):
        x = np.abs(np.asarray(x, dtype=float))
        y = np.asarray(y, dtype=float)
        r, a = self.cap_radius, self.half_length
        body = (x <= a) & (np.abs(y) < r)
        cap = (x - a) ** 2 + y**2 < r * r
        return body | cap

    def boundary_polyline(self, chord_tolerance: float) -> BoundaryPolyline:
        r, a = self.cap_radius, self.half_length
        n = _arc_count(r, math.pi, chord_tolerance)
        right = _arc((a, 0.0), r, -math.pi / 2, math.pi, n, include_end=True)
        left = _arc((-a, 0.0), r, math.pi / 2, math.pi, n, include_end=True)
        v = np.vstack([right, left])
        return BoundaryPolyline(v, chord_tolerance, _sagitta(r, math.pi, n))

    def boundary_distance(self, x, y):
        x = np.abs(np.asarray(x, dtype=float))
        y = np.asarray(y, dtype=float)
        r, a = self.cap_radius, self.half_length
        flat = np.where(x <= a, np.abs(np.abs(y) - r), np.inf)
        cap = np.where(x >= a, np.abs(np.hypot(x - a, y) - r), np.inf)
        # corners of the flat walls are also reachable from the cap side
        corner = np.hypot(x - a, np.abs(y) - r)
        return np.minimum(np.minimum(flat, cap), corner)

    def bbox(self):
        r, a = self.cap_radius, self.half_length
        return (-(a + r), a + r, -r, r)

    def spec(self) -> str:
        return f"stadium r={_fmt(self.cap_radius)} a={_fmt(self.half_length)}"


@dataclass(frozen=True)
class SectorCutDisk(Region):
    """Disk with a sector of angle ``cut_angle`` (radians) removed, mouth centred on +x."""

    radius: float = 1.0
    cut_angle: float = math.pi / 3
    kind = "pacman"

    def __post_init__(self):
        object.__setattr__(self, "radius", _positive("radius", self.radius))
        c = float(self.cut_angle)
        if not 0 < c < 2 * math.pi:
            raise InvalidSpec(f"cut_angle must lie in (0, 2*pi), got {c!r}")
        object.__setattr__(self, "cut_angle", c)

    def area(self) -> float:
        return 0.5 * self.radius**2 * (2 * math.pi - self.cut_angle)

    def contains(self, x, y):
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        return (x * x + y * y < self.radius**2) & (np.abs(np.arctan2(y, x)) > self.cut_angle / 2)

    def boundary_polyline(self, chord_tolerance: float) -> BoundaryPolyline:
        span = 2 * math.pi - self.cut_angle
        n = _arc_count(self.radius, span, chord_tolerance)
        arc = _arc((0.0, 0.0), self.radius, self.cut_angle / 2, span, n, include_end=True)
        v = np.vstack([[[0.0, 0.0]], arc])
        return BoundaryPolyline(v, chord_tolerance, _sagitta(self.radius, span, n))

    def boundary_distance(self, x, y):
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        h = self.cut_angle / 2
        ends = self.radius * np.array([[math.cos(h), math.sin(h)], [math.cos(h), -math.sin(h)]])
        d = np.minimum(_segment_distance(x, y, (0.0, 0.0), ends[0]),
                       _segment_distance(x, y, (0.0, 0.0), ends[1]))
        on_arc = np.abs(np.arctan2(y, x)) >= h
        arc = np.where(on_arc, np.abs(np.hypot(x, y) - self.radius), np.inf)
        arc = np.minimum(arc, np.minimum(np.hypot(x - ends[0, 0], y - ends[0, 1]),
                                         np.hypot(x - ends[1, 0], y - ends[1, 1])))
        return np.minimum(d, arc)

    def bbox(self):
        r, h = self.radius, self.cut_angle / 2
        xmax = max(0.0, r * math.cos(h))
        ymax = r if h < math.pi / 2 else r * math.sin(h)
        return (-r, xmax, -ymax, ymax)

    def spec(self) -> str:
        return f"pacman r={_fmt(self.radius)} cut={_fmt(self.cut_angle)}rad"


# ---------------------------------------------------------------------------
# region-spec grammar

_NUM = r"[-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?"
_POINT = re.compile(rf"\(\s*({_NUM})\s*,\s*({_NUM})\s*\)")
_KEYVAL = re.compile(r"([A-Za-z_]+)\s*=\s*(\S+)")


def _angle(text: str) -> float:
    t = text.strip().lower()
    if t.endswith("deg"):
        return math.radians(float(t[:-3]))
    if t.endswith("rad"):
        t = t[:-3]
    return float(t)


def _number(text: str) -> float:
    try:
        return float(text)
    except ValueError:
        raise InvalidSpec(f"not a number: {text!r}") from None


def parse_region(text: str) -> Region:
    """Parse one line of the region-spec grammar.

    Examples: ``circle r=1``, ``stadium r=1 a=1``,
    ``star points=5 router=1 rinner=0.381966``, ``ngon sides=5 r=1``,
    ``triangle equilateral side=1``, ``pacman r=1 cut=60deg``,
    ``polygon (0,0) (1,0) (0,1)``, ``square side=1``, ``rectangle lx=2 ly=1``.
    """
    text = text.strip()
    if not text:
        raise InvalidSpec("empty region spec")
    head, _, rest = text.partition(" ")
    head = head.lower()
    kv = {k.lower(): v for k, v in _KEYVAL.findall(rest)}
    pts = [(float(a), float(b)) for a, b in _POINT.findall(rest)]

    def get(*names, default=None):
        for n in names:
            if n in kv:
                return kv.pop(n)
        if default is None:
            raise InvalidSpec(f"{head}: missing parameter {names[0]!r}")
        return default

    if head == "circle":
        region = Circle(_number(get("r", "radius")))
    elif head == "stadium":
        region = Stadium(_number(get("r", "radius", default="1")), _number(get("a", "half_length", default="1")))
    elif head == "star":
        points = int(_number(get("points", "n", default="5")))
        ro = _number(get("router", "outer", default="1"))
        ri = kv.pop("rinner", kv.pop("inner", None))
        region = StarPolygon(points, ro, None if ri is None else _number(ri))
    elif head in ("ngon", "regular_polygon"):
        region = RegularPolygon(int(_number(get("sides", "n"))), _number(get("r", "radius", default="1")))
    elif head == "triangle":
        if rest.split() and rest.split()[0].lower() == "equilateral":
            region = EquilateralTriangle(_number(get("side", "a", default="1")))
        elif len(pts) == 3:
            region = Triangle(*pts)
        else:
            raise InvalidSpec("triangle needs 'equilateral side=..' or three (x,y) points")
    elif head == "pacman":
        region = SectorCutDisk(_number(get("r", "radius", default="1")), _angle(get("cut", default="60deg")))
    elif head == "polygon":
        region = Polygon(tuple(pts))
    elif head == "square":
        s = _number(get("side", "a", default="1"))
        region = Rectangle(s, s)
    elif head == "rectangle":
        region = Rectangle(_number(get("lx", "w")), _number(get("ly", "h")))
    else:
        raise InvalidSpec(f"unknown region kind {head!r}")
    if kv:
        raise InvalidSpec(f"{head}: unexpected parameters {sorted(kv)}")
    return region


def build_region(spec) -> Region:
    """Validated region from a spec string, a mapping, or an existing region."""
    if isinstance(spec, Region):
        return spec
    if isinstance(spec, str):
        return parse_region(spec)
    if isinstance(spec, dict):
        params = dict(spec)
        kind = params.pop("kind").lower()
        factories = {
            "circle": Circle, "ngon": RegularPolygon, "regular_polygon": RegularPolygon,
            "polygon": lambda vertices: Polygon(tuple(map(tuple, vertices))),
            "triangle": lambda vertices: Triangle(*vertices),
            "equilateral": EquilateralTriangle, "equilateral_triangle": EquilateralTriangle,
            "stadium": Stadium, "star": StarPolygon, "star_polygon": StarPolygon,
            "pacman": SectorCutDisk, "sector_cut_disk": SectorCutDisk,
            "rectangle": Rectangle,
        }
        if kind not in factories:
            raise InvalidSpec(f"unknown region kind {kind!r}")
        try:
            return factories[kind](**params)
        except TypeError as exc:
            raise InvalidSpec(str(exc)) from None
    raise InvalidSpec(f"cannot build a region from {type(spec).__name__}")


def contains(region: Region, x, y):
    return region.contains(x, y)


def boundary_polyline(region: Region, chord_tolerance: float) -> BoundaryPolyline:
    if not chord_tolerance > 0:
        raise InvalidSpec("chord_tolerance must be positive")
    return region.boundary_polyline(chord_tolerance)


def area(region: Region) -> float:
    return region.area()
