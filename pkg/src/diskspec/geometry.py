"""Planar primitives and orthogonality certification for the unit disk.

Two frequencies are orthogonal for the disk exactly when their distance is a
zero r_n of ``ft_disk``; a point set is certified when every pairwise distance
is within ``tol`` of some r_n.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, NamedTuple, Sequence

import numpy as np

from .bessel import ZeroTable
from .errors import (
    ClassificationDomainError,
    DegenerateInputError,
    DomainError,
    RangeError,
)

DEFAULT_TOL = 1e-9
DUPLICATE_EPS = 1e-12
TANGENCY_RTOL = 1e-10


class Point(NamedTuple):
    x: float
    y: float


class Violation(NamedTuple):
    i: int
    j: int
    distance: float
    nearest_n: int
    defect: float


@dataclass(frozen=True)
class Configuration:
    """Point set with its certification record at tolerance ``tol``."""

    points: tuple[Point, ...]
    tol: float
    certified: bool
    violations: tuple[Violation, ...] = ()

    @property
    def size(self) -> int:
        return len(self.points)

    def as_array(self) -> np.ndarray:
        return np.array(self.points, dtype=float).reshape(-1, 2)


def as_points(points: Iterable) -> tuple[Point, ...]:
    if isinstance(points, Configuration):
        return points.points
    out = []
    for p in points:
        x, y = float(p[0]), float(p[1])
        if not (math.isfinite(x) and math.isfinite(y)):
            raise DomainError(f"non-finite point {p!r}")
        out.append(Point(x, y))
    return tuple(out)


def pairwise_distances(arr: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Upper-triangle index pairs (i < j, row-major) and their distances."""
    i, j = np.triu_indices(len(arr), 1)
    d = np.hypot(arr[i, 0] - arr[j, 0], arr[i, 1] - arr[j, 1])
    return i, j, d


def min_gap(points) -> float:
    pts = as_points(points)
    if len(pts) < 2:
        raise DomainError("min_gap needs at least two points")
    _, _, d = pairwise_distances(np.array(pts))
    return float(d.min())


class Admissibility(NamedTuple):
    admissible: bool
    nearest_n: int
    defect: float


def is_admissible_distance(d: float, table: ZeroTable, tol: float = DEFAULT_TOL) -> Admissibility:
    """Whether ``d`` is within ``tol`` of a zero of the disk's transform."""
    if not d > 0:
        raise DomainError(f"distance must be positive, got {d}")
    n, defect = table.nearest(float(d))
    return Admissibility(defect <= tol, n, defect)


def verify_configuration(points, table: ZeroTable, tol: float = DEFAULT_TOL) -> Configuration:
    """Certify every pairwise distance of ``points`` against ``table``."""
    if not tol > 0:
        raise DomainError("tol must be positive")
    pts = as_points(points)
    if len(pts) < 2:
        return Configuration(pts, tol, True, ())
    i, j, d = pairwise_distances(np.array(pts))
    if np.any(d < DUPLICATE_EPS):
        k = int(np.argmin(d))
        raise DegenerateInputError(f"points {i[k]} and {j[k]} coincide")
    if float(d.max()) > table.r_max:
        raise RangeError(f"pairwise distance {float(d.max()):.6g} exceeds table range {table.r_max}")
    near, defect = table.nearest(d)
    bad = np.flatnonzero(defect > tol)
    violations = tuple(
        Violation(int(i[k]), int(j[k]), float(d[k]), int(near[k]), float(defect[k])) for k in bad
    )
    return Configuration(pts, tol, not violations, violations)


class Angles(NamedTuple):
    largest: float
    middle: float
    smallest: float
    degenerate: bool


def _vertex_angle(p, q, r) -> float:
    ux, uy = q[0] - p[0], q[1] - p[1]
    vx, vy = r[0] - p[0], r[1] - p[1]
    return math.atan2(abs(ux * vy - uy * vx), ux * vx + uy * vy)


def triangle_angles(a, b, c) -> Angles:
    """Interior angles sorted in decreasing order.

    Triangles with area <= 1e-12 * diameter**2 are flagged degenerate and
    reported as (pi, 0, 0).
    """
    a, b, c = as_points((a, b, c))
    cross = (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x)
    diam2 = max((a.x - b.x) ** 2 + (a.y - b.y) ** 2,
                (a.x - c.x) ** 2 + (a.y - c.y) ** 2,
                (b.x - c.x) ** 2 + (b.y - c.y) ** 2)
    if abs(cross) / 2 <= 1e-12 * diam2:
        return Angles(math.pi, 0.0, 0.0, True)
    angles = sorted((_vertex_angle(a, b, c), _vertex_angle(b, c, a), _vertex_angle(c, a, b)),
                    reverse=True)
    return Angles(*angles, False)


def _cross(o, a, b) -> float:
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])


def convex_hull(points) -> list[Point]:
    """Andrew's monotone chain; counter-clockwise, collinear points dropped."""
    pts = sorted(set(as_points(points)))
    if len(pts) <= 2:
        return pts
    lower: list[Point] = []
    for p in pts:
        while len(lower) >= 2 and _cross(lower[-2], lower[-1], p) <= 0:
            lower.pop()
        lower.append(p)
    upper: list[Point] = []
    for p in reversed(pts):
        while len(upper) >= 2 and _cross(upper[-2], upper[-1], p) <= 0:
            upper.pop()
        upper.append(p)
    return lower[:-1] + upper[:-1]


def strip_width(points) -> float:
    """Width of the narrowest closed strip containing all points.

    Rotating calipers over the convex hull: the optimum has a hull edge on
    one side of the strip.
    """
    pts = as_points(points)
    if len(pts) < 2:
        raise DomainError("strip_width needs at least two points")
    hull = convex_hull(pts)
    h = len(hull)
    if h <= 2:
        return 0.0
    best = math.inf
    k = 1
    for i in range(h):
        p, q = hull[i], hull[(i + 1) % h]
        while _cross(p, q, hull[(k + 1) % h]) > _cross(p, q, hull[k]):
            k = (k + 1) % h
        edge = math.hypot(q.x - p.x, q.y - p.y)
        best = min(best, _cross(p, q, hull[k]) / edge)
    return best


def circle_intersections(c1, r1: float, c2, r2: float) -> list[Point]:
    """Intersection points of two circles, sorted by (y, x).

    Tangency is detected with relative tolerance 1e-10 and yields one point.
    """
    (c1, c2) = as_points((c1, c2))
    if not (r1 > 0 and r2 > 0):
        raise DomainError("radii must be positive")
    dx, dy = c2.x - c1.x, c2.y - c1.y
    d = math.hypot(dx, dy)
    if d == 0:
        raise DomainError("concentric circles")
    ux, uy = dx / d, dy / d
    outer = r1 + r2
    inner = abs(r1 - r2)
    if abs(d - outer) <= TANGENCY_RTOL * outer:
        return [Point(c1.x + r1 * ux, c1.y + r1 * uy)]
    if abs(d - inner) <= TANGENCY_RTOL * outer:
        s = r1 if r1 > r2 else -r1
        return [Point(c1.x + s * ux, c1.y + s * uy)]
    if d > outer or d < inner:
        return []
    along = (d * d + r1 * r1 - r2 * r2) / (2 * d)
    h = math.sqrt(max(0.0, (r1 - along) * (r1 + along)))
    mx, my = c1.x + along * ux, c1.y + along * uy
    pts = [Point(mx - h * uy, my + h * ux), Point(mx + h * uy, my - h * ux)]
    return sorted(pts, key=lambda p: (p.y, p.x))


def circle_intersections_many(c1, c2, r1: np.ndarray, r2: np.ndarray) -> np.ndarray:
    """Vectorised ``circle_intersections`` over radius arrays; returns (k, 2) points.

    Output is not sorted; callers canonicalise.
    """
    (c1, c2) = as_points((c1, c2))
    r1 = np.asarray(r1, dtype=float)
    r2 = np.asarray(r2, dtype=float)
    dx, dy = c2.x - c1.x, c2.y - c1.y
    d = math.hypot(dx, dy)
    if d == 0:
        raise DomainError("concentric circles")
    ux, uy = dx / d, dy / d
    outer = r1 + r2
    inner = np.abs(r1 - r2)
    tangent_out = np.abs(d - outer) <= TANGENCY_RTOL * outer
    tangent_in = ~tangent_out & (np.abs(d - inner) <= TANGENCY_RTOL * outer)
    crossing = ~tangent_out & ~tangent_in & (d < outer) & (d > inner)
    out = []
    if tangent_out.any():
        s = r1[tangent_out]
        out.append(np.column_stack([c1.x + s * ux, c1.y + s * uy]))
    if tangent_in.any():
        s = np.where(r1 > r2, r1, -r1)[tangent_in]
        out.append(np.column_stack([c1.x + s * ux, c1.y + s * uy]))
    if crossing.any():
        a, b = r1[crossing], r2[crossing]
        along = (d * d + a * a - b * b) / (2 * d)
        h = np.sqrt(np.maximum(0.0, (a - along) * (a + along)))
        mx, my = c1.x + along * ux, c1.y + along * uy
        out.append(np.column_stack([mx - h * uy, my + h * ux]))
        out.append(np.column_stack([mx + h * uy, my - h * ux]))
    if not out:
        return np.empty((0, 2))
    return np.concatenate(out)


class HyperbolaParams(NamedTuple):
    a_lambda: float
    b_lambda: float


def focal_difference(p, delta: float) -> float:
    """|p + V| - |p - V| for V = (delta, 0), in a cancellation-free form."""
    x, y = p
    plus = math.hypot(x + delta, y)
    minus = math.hypot(x - delta, y)
    return 4 * delta * x / (plus + minus)


def hyperbola_params(p, delta: float) -> HyperbolaParams:
    """Semi-axes of the hyperbola with foci (+-delta, 0) through ``p``.

    ``p`` must lie in the open first quadrant.
    """
    if not delta > 0:
        raise DomainError("delta must be positive")
    (p,) = as_points((p,))
    if not (p.x > 0 and p.y > 0):
        raise ClassificationDomainError(f"{p} is not in the open first quadrant")
    s = focal_difference(p, delta)
    if not 0 < s < 2 * delta:
        raise ClassificationDomainError(f"focal difference {s} outside (0, {2 * delta})")
    a = s / 2
    return HyperbolaParams(a, math.sqrt((delta - a) * (delta + a)))


def hyperbola_point(a_lambda: float, b_lambda: float, t: float) -> Point:
    return Point(a_lambda * math.cosh(t), b_lambda * math.sinh(t))


def hyperbola_parameter(p, params: HyperbolaParams) -> float:
    """The t >= 0 with p = (a cosh t, b sinh t)."""
    return math.asinh(p[1] / params.b_lambda)


@dataclass(frozen=True)
class HyperbolaClassification:
    a_lambda: float
    b_lambda: float
    k: int
    epsilon: float
    epsilon_prime: float
    asymptote_distance: float
    delta: float

    @property
    def sign_agrees(self) -> bool:
        """epsilon and epsilon_prime share a sign (zero counts as agreeing)."""
        return self.epsilon * self.epsilon_prime >= 0


def classify_hyperbola(p, delta: float) -> HyperbolaClassification:
    """Place ``p`` relative to the confocal family H_k = H(k/4, delta).

    k is the integer with focal difference k/2 + 2*eps, -1/8 <= eps < 1/8;
    the asymptote distance is measured to the asymptote y = (b/a) x of H_k.
    """
    params = hyperbola_params(p, delta)
    s = 2 * params.a_lambda
    k = math.floor(2 * s + 0.5)
    k_max = math.floor(4 * delta)
    if not 0 <= k <= k_max:
        raise ClassificationDomainError(f"k={k} outside [0, {k_max}]")
    eps = (s - k / 2) / 2
    a = k / 4
    b = math.sqrt((delta - a) * (delta + a))
    dist = abs(b * p[0] - a * p[1]) / delta
    return HyperbolaClassification(
        a_lambda=params.a_lambda,
        b_lambda=params.b_lambda,
        k=k,
        epsilon=eps,
        epsilon_prime=b - params.b_lambda,
        asymptote_distance=dist,
        delta=delta,
    )


def closest_pair(points) -> tuple[int, int]:
    pts = as_points(points)
    if len(pts) < 2:
        raise DomainError("need at least two points")
    i, j, d = pairwise_distances(np.array(pts))
    k = int(np.argmin(d))
    return int(i[k]), int(j[k])


def canonicalize(points) -> tuple[tuple[Point, ...], float]:
    """Move the closest pair to (-delta, 0), (delta, 0); returns (points, delta).

    Ties in the closest pair go to the lexicographically first index pair.
    """
    pts = as_points(points)
    i, j = closest_pair(pts)
    p, q = pts[i], pts[j]
    mx, my = (p.x + q.x) / 2, (p.y + q.y) / 2
    delta = math.hypot(q.x - p.x, q.y - p.y) / 2
    c, s = (q.x - p.x) / (2 * delta), (q.y - p.y) / (2 * delta)
    out = []
    for k, r in enumerate(pts):
        if k == i:
            out.append(Point(-delta, 0.0))
        elif k == j:
            out.append(Point(delta, 0.0))
        else:
            dx, dy = r.x - mx, r.y - my
            out.append(Point(c * dx + s * dy, -s * dx + c * dy))
    return tuple(out), delta


def seed_delta(points) -> float:
    """Half-distance of a pair (-d, 0), (d, 0) present in ``points``, if any.

    Falls back to half the minimum gap, which is what ``canonicalize`` uses.
    """
    pts = as_points(points)
    on_axis = {p.x for p in pts if p.y == 0 and p.x > 0}
    pairs = [x for x in on_axis if Point(-x, 0.0) in pts or Point(-x, -0.0) in pts]
    if pairs:
        return min(pairs)
    return min_gap(pts) / 2


def first_quadrant(points: Sequence[Point]) -> list[Point]:
    """Fold points into the closed first quadrant by the reflections fixing +-V."""
    return [Point(abs(p.x), abs(p.y)) for p in points]
