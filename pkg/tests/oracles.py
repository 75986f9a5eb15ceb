"""Reference computations that share no code with the package.

J1 is summed from its power series in mpmath at high precision and roots are
found by bisection on sign changes; the disk transform is checked against a
2D quadrature; intersections and re-verification use scipy's Bessel zeros.
"""
import math

import mpmath
import numpy as np
from scipy import integrate, special

_DPS = 60


def j1_series(x) -> mpmath.mpf:
    """sum (-1)^m (x/2)^(2m+1) / (m! (m+1)!) until terms are negligible."""
    # The largest term is about e^|x|, so |x|/2.3 digits are lost to cancellation.
    dps = _DPS + int(abs(float(x)) / 2.3)
    with mpmath.workdps(dps):
        x = mpmath.mpf(x)
        h = x / 2
        term = h
        total = term
        m = 0
        while True:
            m += 1
            term *= -h * h / (m * (m + 1))
            total += term
            if abs(term) < mpmath.mpf(10) ** (-dps + 5) and m > abs(x):
                return +total


def bisect_root(lo: float, hi: float, tol: float = 1e-15) -> float:
    with mpmath.workdps(_DPS):
        a, b = mpmath.mpf(lo), mpmath.mpf(hi)
        fa = j1_series(a)
        if fa * j1_series(b) > 0:
            raise ValueError("no sign change")
        while b - a > tol:
            m = (a + b) / 2
            fm = j1_series(m)
            if fa * fm <= 0:
                b = m
            else:
                a, fa = m, fm
        return float((a + b) / 2)


def series_roots(x_max: float, step: float = 0.25) -> list[float]:
    """All positive roots of J1 below x_max, by scanning for sign changes."""
    grid = np.arange(step, x_max + step, step)
    vals = [j1_series(x) for x in grid]
    roots = []
    for k in range(len(grid) - 1):
        if vals[k] == 0:
            roots.append(float(grid[k]))
        elif vals[k] * vals[k + 1] < 0:
            roots.append(bisect_root(grid[k], grid[k + 1]))
    return [r for r in roots if r < x_max]


def disk_transform_quadrature(r: float) -> float:
    """Integral over the unit disk of cos(2 pi r x), by adaptive quadrature."""
    val, _ = integrate.dblquad(
        lambda y, x: math.cos(2 * math.pi * r * x),
        -1.0, 1.0,
        lambda x: -math.sqrt(1 - x * x), lambda x: math.sqrt(1 - x * x),
        epsabs=1e-12, epsrel=1e-12,
    )
    return val


def scipy_r_zeros(count: int) -> np.ndarray:
    return special.jn_zeros(1, count) / (2 * math.pi)


def reverify(points, tol: float) -> bool:
    """Every pairwise distance within tol of a zero from scipy's table."""
    pts = np.asarray(points, dtype=float)
    diffs = pts[:, None, :] - pts[None, :, :]
    d = np.hypot(diffs[..., 0], diffs[..., 1])[np.triu_indices(len(pts), 1)]
    r = scipy_r_zeros(int(2 * d.max()) + 5)
    return bool(np.all(np.min(np.abs(d[:, None] - r[None, :]), axis=1) <= tol))


def brute_force_candidates(p, q, radii, tol):
    """Intersections of circle(p, ri) and circle(q, rj) for every ordered (i, j),
    merged greedily within 2 tol and with p, q removed."""
    out = []
    (px, py), (qx, qy) = p, q
    dx, dy = qx - px, qy - py
    d = math.hypot(dx, dy)
    for ri in radii:
        for rj in radii:
            if d > ri + rj or d < abs(ri - rj):
                continue
            a = (ri * ri - rj * rj + d * d) / (2 * d)
            h = math.sqrt(max(ri * ri - a * a, 0.0))
            mx, my = px + a * dx / d, py + a * dy / d
            for s in (1, -1):
                c = (mx - s * h * dy / d, my + s * h * dx / d)
                if all(math.dist(c, o) > 2 * tol for o in out + [p, q]):
                    out.append(c)
    return out
