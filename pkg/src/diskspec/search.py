"""Constructive search for large orthogonal configurations.

A new point is pinned down, up to a reflection, by its distances to two
existing points, so candidates are intersections of circles whose radii are
zeros of the disk's transform.  Every point admissible to both members of the
seed pair is such an intersection around the seed, so the search reduces to
enumerating pairwise-admissible subsets (cliques) of ``candidate_points(seed)``.

Subtrees hanging off the seed are explored independently, each with a node
quota that depends only on the subtree's rank, and merged in canonical order;
the report is therefore the same for any number of workers.
"""
from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .bessel import ZeroTable, build_zero_table
from .errors import DomainError, NotCertifiedError, RangeError
from .geometry import (
    Configuration,
    Point,
    as_points,
    circle_intersections_many,
    verify_configuration,
)

CANONICAL_DECIMALS = 9


@dataclass(frozen=True)
class SearchBudget:
    max_nodes: int
    r_max: float
    tol: float
    target_size: Optional[int] = None

    def __post_init__(self):
        if self.max_nodes < 1:
            raise DomainError("max_nodes must be >= 1")
        if not self.tol > 0:
            raise DomainError("tol must be positive")
        if not self.r_max > 0:
            raise DomainError("r_max must be positive")
        if self.target_size is not None and self.target_size < 2:
            raise DomainError("target_size must be >= 2")


@dataclass(frozen=True)
class SearchReport:
    best: tuple[Configuration, ...]
    nodes_expanded: int
    size_histogram: dict[int, int]
    truncated: bool = False
    seed_n: int = 1
    tol: float = 1e-9
    r_max: float = 0.0
    max_nodes: int = 0
    target_size: Optional[int] = None

    @property
    def best_size(self) -> int:
        return self.best[0].size if self.best else 0


def _key(v: float) -> float:
    return round(v, CANONICAL_DECIMALS) + 0.0


def point_key(p) -> tuple[float, float]:
    return (_key(p[0]), _key(p[1]))


def canonical_points(points) -> tuple[Point, ...]:
    """Representative under the reflections x -> -x and y -> -y, sorted.

    These are the symmetries that fix the seed pair {(-d, 0), (d, 0)}.
    Applying it twice returns the same tuple.
    """
    pts = as_points(points)
    best = None
    for sx in (1.0, -1.0):
        for sy in (1.0, -1.0):
            img = sorted((Point(sx * p.x + 0.0, sy * p.y + 0.0) for p in pts), key=point_key)
            key = tuple(point_key(p) for p in img)
            if best is None or key < best[0]:
                best = (key, tuple(img))
    return best[1]


def canonical_key(points) -> tuple:
    pts = canonical_points(points)
    return (len(pts), tuple(point_key(p) for p in pts))


def seed_pair(n: int, table: ZeroTable, tol: float = 1e-9) -> Configuration:
    """The pair (-r_n/2, 0), (r_n/2, 0)."""
    r = table.r(n)
    return verify_configuration([(-r / 2, 0.0), (r / 2, 0.0)], table, tol)


def _dedup(arr: np.ndarray, radius: float, exclude: np.ndarray) -> np.ndarray:
    """Drop points within ``radius`` of an earlier kept point or of ``exclude``."""
    if len(arr) == 0:
        return arr
    order = np.lexsort((arr[:, 1], arr[:, 0]))
    arr = arr[order]
    cell = max(radius, 1e-300)
    grid: dict[tuple[int, int], list[int]] = {}
    keep: list[int] = []
    pool = [tuple(p) for p in exclude]
    for k, (x, y) in enumerate(pool):
        grid.setdefault((math.floor(x / cell), math.floor(y / cell)), []).append(-1 - k)
    for idx, (x, y) in enumerate(arr):
        cx, cy = math.floor(x / cell), math.floor(y / cell)
        clash = False
        for gx in (cx - 1, cx, cx + 1):
            for gy in (cy - 1, cy, cy + 1):
                for other in grid.get((gx, gy), ()):
                    ox, oy = pool[-1 - other] if other < 0 else arr[other]
                    if math.hypot(x - ox, y - oy) <= radius:
                        clash = True
                        break
                if clash:
                    break
            if clash:
                break
        if not clash:
            keep.append(idx)
            grid.setdefault((cx, cy), []).append(idx)
    return arr[keep]


def _sort_points(arr: np.ndarray) -> list[Point]:
    pts = [Point(float(x), float(y)) for x, y in arr]
    return sorted(pts, key=point_key)


def candidate_points(config: Configuration, table: ZeroTable,
                     r_max: Optional[float] = None) -> list[Point]:
    """All circle-circle intersections around pairs of members of ``config``.

    Radii are the table zeros r_n <= r_max (default: the whole table).
    Points within 2*tol of each other or of a member are merged.
    """
    if not config.certified:
        raise NotCertifiedError("candidate_points needs a certified configuration")
    if config.size < 2:
        raise DomainError("candidate_points needs at least two members")
    radii = table.r_zeros if r_max is None else table.r_zeros[table.r_zeros <= r_max]
    ri, rj = np.meshgrid(radii, radii, indexing="ij")
    ri, rj = ri.ravel(), rj.ravel()
    chunks = []
    pts = config.points
    for a in range(len(pts)):
        for b in range(a + 1, len(pts)):
            chunks.append(circle_intersections_many(pts[a], pts[b], ri, rj))
    arr = np.concatenate(chunks) if chunks else np.empty((0, 2))
    arr = _dedup(arr, 2 * config.tol, np.array(pts))
    return _sort_points(arr)


def extend(config: Configuration, table: ZeroTable, tol: float,
           r_max: Optional[float] = None) -> list[Configuration]:
    """Certified one-point extensions of ``config``, in candidate order."""
    if not config.certified:
        raise NotCertifiedError("extend needs a certified configuration")
    cands = candidate_points(config, table, r_max)
    if not cands:
        return []
    members = config.as_array()
    c = np.array(cands)
    d = np.hypot(c[:, None, 0] - members[None, :, 0], c[:, None, 1] - members[None, :, 1])
    if float(d.max()) > table.r_max:
        raise RangeError("candidate distances exceed the table range; extend the table")
    _, defect = table.nearest(d)
    ok = np.all(defect <= tol, axis=1)
    out = []
    for idx in np.flatnonzero(ok):
        cfg = verify_configuration(config.points + (cands[idx],), table, tol)
        if cfg.certified:
            out.append(cfg)
    return out


# --- worker side -----------------------------------------------------------

_ADJ: list[frozenset] = []
_TARGET: Optional[int] = None


def _init_worker(adjacency, target):
    global _ADJ, _TARGET
    _ADJ = adjacency
    _TARGET = target


def _explore(task):
    """Depth-first clique enumeration below candidate ``root``.

    Each clique is visited once, by adding candidates in increasing index.
    Returns (root, nodes, histogram, best_size, best_cliques, truncated).
    """
    root, quota = task
    hist: dict[int, int] = {}
    best_size = 0
    best: list[tuple[int, ...]] = []
    nodes = 0
    truncated = False
    if quota < 1:
        return root, 0, hist, 0, [], True
    stack = [((root,), sorted(j for j in _ADJ[root] if j > root))]
    while stack:
        clique, cands = stack.pop()
        if nodes >= quota:
            truncated = True
            break
        nodes += 1
        size = len(clique) + 2
        hist[size] = hist.get(size, 0) + 1
        if size > best_size:
            best_size, best = size, [clique]
        elif size == best_size:
            best.append(clique)
        if _TARGET is not None and size >= _TARGET:
            break
        children = []
        for pos, c in enumerate(cands):
            nbrs = _ADJ[c]
            children.append((clique + (c,), [d for d in cands[pos + 1:] if d in nbrs]))
        stack.extend(reversed(children))
    return root, nodes, hist, best_size, best, truncated


def _quotas(total: int, parts: int) -> list[int]:
    if parts == 0:
        return []
    base, extra = divmod(total, parts)
    return [base + (1 if i < extra else 0) for i in range(parts)]


def search_maximal(n_seed: int, budget: SearchBudget, table: ZeroTable,
                   workers: int = 1) -> SearchReport:
    """Largest certified configurations containing ``seed_pair(n_seed)``.

    ``table`` supplies the candidate radii (those <= budget.r_max); a larger
    table is built internally when pairwise candidate distances exceed it.
    """
    if budget.r_max < table.r(1):
        raise DomainError("budget r_max lies below the first zero")
    if budget.r_max > table.r_max:
        raise RangeError("budget r_max exceeds the table range")
    seed = seed_pair(n_seed, table, budget.tol)
    cands = candidate_points(
        Configuration(seed.points, budget.tol, True, ()), table, budget.r_max
    )
    arr = np.array(cands, dtype=float).reshape(-1, 2)
    reach = float(np.hypot(arr[:, 0], arr[:, 1]).max()) if len(arr) else 0.0
    need = 2 * reach + 1.0
    check = table if table.r_max >= need else build_zero_table(need, table.refine_tol)

    # Candidates are admissible to the seed by construction; keep the check anyway.
    seed_arr = seed.as_array()
    if len(arr):
        ds = np.hypot(arr[:, None, 0] - seed_arr[None, :, 0], arr[:, None, 1] - seed_arr[None, :, 1])
        ok = np.all(check.nearest(ds)[1] <= budget.tol, axis=1)
        arr = arr[ok]
    m = len(arr)
    adjacency: list[frozenset] = [frozenset()] * m
    if m > 1:
        i, j = np.triu_indices(m, 1)
        d = np.hypot(arr[i, 0] - arr[j, 0], arr[i, 1] - arr[j, 1])
        good = (d > 2 * budget.tol) & (check.nearest(d)[1] <= budget.tol)
        nbrs: list[set] = [set() for _ in range(m)]
        for a, b in zip(i[good].tolist(), j[good].tolist()):
            nbrs[a].add(b)
            nbrs[b].add(a)
        adjacency = [frozenset(s) for s in nbrs]

    hist: dict[int, int] = {2: 1}
    nodes = 1
    truncated = False
    best_size = 2
    best_cliques: list[tuple[int, ...]] = [()]
    done_early = budget.target_size is not None and budget.target_size <= 2
    if m and not done_early:
        tasks = list(zip(range(m), _quotas(budget.max_nodes - 1, m)))
        if workers <= 1:
            _init_worker(adjacency, budget.target_size)
            results = [_explore(t) for t in tasks]
        else:
            with ProcessPoolExecutor(max_workers=workers, initializer=_init_worker,
                                     initargs=(adjacency, budget.target_size)) as pool:
                results = list(pool.map(_explore, tasks, chunksize=max(1, m // (4 * workers))))
        results.sort(key=lambda r: r[0])
        for _, n_nodes, sub_hist, sub_size, sub_best, sub_trunc in results:
            nodes += n_nodes
            truncated |= sub_trunc
            for size, count in sub_hist.items():
                hist[size] = hist.get(size, 0) + count
            if sub_size > best_size:
                best_size, best_cliques = sub_size, list(sub_best)
            elif sub_size == best_size:
                best_cliques.extend(sub_best)

    by_key: dict[tuple, Configuration] = {}
    for clique in best_cliques:
        pts = seed.points + tuple(Point(float(arr[c, 0]), float(arr[c, 1])) for c in clique)
        canon = canonical_points(pts)
        key = canonical_key(canon)
        if key in by_key:
            continue
        cfg = verify_configuration(canon, check, budget.tol)
        if not cfg.certified:
            raise AssertionError(f"search produced an uncertified configuration: {cfg.violations}")
        by_key[key] = cfg
    best = tuple(by_key[k] for k in sorted(by_key))
    return SearchReport(
        best=best,
        nodes_expanded=nodes,
        size_histogram=dict(sorted(hist.items())),
        truncated=truncated,
        seed_n=n_seed,
        tol=budget.tol,
        r_max=budget.r_max,
        max_nodes=budget.max_nodes,
        target_size=budget.target_size,
    )
