"""Bessel functions J0/J1, the Fourier transform of the unit disk, and zeros of J1.

J0 and J1 are evaluated in three ranges: the ascending power series for
|x| <= 8, Miller's backward recurrence for 8 < |x| <= 25 and the Hankel
asymptotic expansion beyond.  The series is summed in ``np.longdouble`` so
cancellation among its ~1e2 sized terms stays invisible; the recurrence is
stable in double precision (absolute error ~4e-16); at |x| = 25 the truncated
Hankel series is already good to ~1e-20.

Zeros of J1 are seeded with McMahon's expansion ``rho + K1/rho`` and polished
by a bracketed Newton iteration.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import DomainError, EmptyTableError, RangeError, RefinementError

SERIES_CUTOFF = 8.0
RECURRENCE_CUTOFF = 25.0
MCMAHON_K1 = -3.0 / 8.0
DEFAULT_REFINE_TOL = 1e-12

_SERIES_TERMS = 48
_HANKEL_MAX_TERMS = 64
_MILLER_START = 64
_INV_SQRT2 = 1.0 / math.sqrt(2.0)


def _series(x: np.ndarray, order: int) -> np.ndarray:
    h = np.asarray(x, dtype=np.longdouble) / 2
    term = h.copy() if order == 1 else np.ones_like(h)
    total = term.copy()
    neg_h2 = -(h * h)
    for m in range(1, _SERIES_TERMS):
        term = term * neg_h2 / (m * (m + order))
        total += term
    return total.astype(float)


def _miller(x: np.ndarray, order: int) -> np.ndarray:
    # Downward recurrence J_{k-1} = (2k/x) J_k - J_{k+1} from a tiny seed,
    # normalised by J0 + 2 (J2 + J4 + ...) = 1.
    two_over_x = 2.0 / np.asarray(x, dtype=float)
    nxt = np.zeros_like(two_over_x)
    cur = np.full_like(two_over_x, 1e-30)
    norm = np.zeros_like(two_over_x)
    j1 = cur
    for k in range(_MILLER_START, 0, -1):
        nxt, cur = cur, (k * two_over_x) * cur - nxt
        if k == 2:
            j1 = cur
        elif k % 2 == 1 and k > 1:
            norm += 2 * cur
    norm += cur
    return (cur if order == 0 else j1) / norm


def _hankel(x: np.ndarray, order: int) -> np.ndarray:
    # Terms are added until they stop decreasing (optimal truncation) or drop
    # below 1e-18; P collects even terms, Q odd ones.
    mu = 4.0 * order * order
    p = np.ones_like(x)
    q = np.zeros_like(x)
    term = np.ones_like(x)
    active = np.ones(x.shape, dtype=bool)
    for k in range(1, _HANKEL_MAX_TERMS):
        new = term * (mu - (2 * k - 1) ** 2) / (k * 8.0 * x)
        if k > 2:
            active &= np.abs(new) <= np.abs(term)
        sign = -1.0 if (k // 2) % 2 else 1.0
        contrib = np.where(active, sign * new, 0.0)
        if k % 2 == 0:
            p += contrib
        else:
            q += contrib
        active &= np.abs(new) >= 1e-18
        term = new
        if not active.any():
            break
    c, s = np.cos(x), np.sin(x)
    if order == 0:
        cos_chi, sin_chi = (c + s) * _INV_SQRT2, (s - c) * _INV_SQRT2
    else:
        cos_chi, sin_chi = (s - c) * _INV_SQRT2, -(s + c) * _INV_SQRT2
    return np.sqrt(2.0 / (math.pi * x)) * (p * cos_chi - q * sin_chi)


def _evaluate(x, order: int):
    arr = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise DomainError(f"J{order} needs finite arguments")
    ax = np.abs(arr)
    out = np.empty_like(ax)
    small = ax <= SERIES_CUTOFF
    large = ax > RECURRENCE_CUTOFF
    middle = ~small & ~large
    if small.any():
        out[small] = _series(ax[small], order)
    if middle.any():
        out[middle] = _miller(ax[middle], order)
    if large.any():
        out[large] = _hankel(ax[large], order)
    if order == 1:
        out = np.where(arr < 0, -out, out)
    if out.ndim == 0:
        return float(out)
    return out


def bessel_j0(x):
    """J0(x) for a scalar or array argument."""
    return _evaluate(x, 0)


def bessel_j1(x):
    """J1(x) for a scalar or array argument; exactly odd in x."""
    return _evaluate(x, 1)


def bessel_j1_prime(x):
    """J1'(x) = J0(x) - J1(x)/x, with the limit 1/2 at the origin."""
    arr = np.asarray(x, dtype=float)
    j0 = np.asarray(bessel_j0(arr))
    j1 = np.asarray(bessel_j1(arr))
    safe = np.where(arr == 0, 1.0, arr)
    out = np.where(arr == 0, 0.5, j0 - j1 / safe)
    if out.ndim == 0:
        return float(out)
    return out


def ft_disk(r):
    """Radial profile of the Fourier transform of the unit disk's indicator.

    Equals ``J1(2*pi*r)/r`` for r > 0 and the disk area pi at r = 0.
    """
    arr = np.asarray(r, dtype=float)
    if not np.all(np.isfinite(arr)) or np.any(arr < 0):
        raise DomainError("ft_disk needs finite r >= 0")
    safe = np.where(arr == 0, 1.0, arr)
    out = np.where(arr == 0, math.pi, np.asarray(bessel_j1(2 * math.pi * safe)) / safe)
    if out.ndim == 0:
        return float(out)
    return out


def ft_disk_prime(r):
    """d/dr of ft_disk; zero at the origin."""
    arr = np.asarray(r, dtype=float)
    if not np.all(np.isfinite(arr)) or np.any(arr < 0):
        raise DomainError("ft_disk_prime needs finite r >= 0")
    safe = np.where(arr == 0, 1.0, arr)
    x = 2 * math.pi * safe
    val = (2 * math.pi * np.asarray(bessel_j1_prime(x)) / safe
           - np.asarray(bessel_j1(x)) / safe ** 2)
    out = np.where(arr == 0, 0.0, val)
    if out.ndim == 0:
        return float(out)
    return out


def _check_index(n) -> int:
    if isinstance(n, bool) or not isinstance(n, (int, np.integer)):
        raise DomainError(f"zero index must be an integer, got {n!r}")
    if n < 1:
        raise DomainError(f"zero index must be >= 1, got {n}")
    return int(n)


def _rho(n):
    return n * math.pi + math.pi / 4


def mcmahon_zero(n: int) -> float:
    """Two-term McMahon approximation of the n-th positive zero of J1."""
    n = _check_index(n)
    rho = _rho(n)
    return rho + MCMAHON_K1 / rho


def _polish(x: np.ndarray) -> np.ndarray:
    # Pick whichever of x and its two float neighbours has the smallest |J1|;
    # x itself comes first so it wins ties.
    cands = np.stack([x, np.nextafter(x, -np.inf), np.nextafter(x, np.inf)])
    vals = np.abs(np.asarray(bessel_j1(cands)))
    best = np.argmin(vals, axis=0)
    return cands[best, np.arange(x.size)]


def _converged(step, x, tol):
    return np.abs(step) <= np.maximum(tol, 2 * np.spacing(np.abs(x)))


def refine_zero(n: int, x0: float | None = None, tol: float = DEFAULT_REFINE_TOL) -> float:
    """Polish an approximation of the n-th zero of J1.

    Newton steps use J1' = J0 - J1/x.  The bracket (rho_n - pi/2, rho_n + pi/2)
    holds exactly one zero; it is shrunk as the iteration proceeds and any
    step leaving it is replaced by bisection.
    """
    n = _check_index(n)
    rho = _rho(n)
    lo, hi = rho - math.pi / 2, rho + math.pi / 2
    f_lo, f_hi = bessel_j1(lo), bessel_j1(hi)
    if f_lo * f_hi > 0:
        raise RefinementError(f"no sign change of J1 on the bracket of zero {n}")
    x = mcmahon_zero(n) if x0 is None else float(x0)
    if not lo < x < hi:
        x = 0.5 * (lo + hi)
    for _ in range(200):
        f = bessel_j1(x)
        if f == 0.0:
            return x
        if (f > 0) == (f_lo > 0):
            lo, f_lo = x, f
        else:
            hi = x
        step = f / bessel_j1_prime(x)
        x_new = x - step
        if not lo <= x_new <= hi:
            x_new = 0.5 * (lo + hi)
        if _converged(x_new - x, x, tol):
            return float(_polish(np.array([x_new]))[0])
        x = x_new
    raise RefinementError(f"refinement of zero {n} did not converge")


def _refine_many(ns: np.ndarray, tol: float) -> np.ndarray:
    rho = _rho(ns.astype(float))
    x = rho + MCMAHON_K1 / rho
    done = np.zeros(ns.shape, dtype=bool)
    for _ in range(12):
        step = np.asarray(bessel_j1(x)) / np.asarray(bessel_j1_prime(x))
        x = np.where(done, x, x - step)
        done |= _converged(step, x, tol)
        if done.all():
            break
    bad = ~done | (np.abs(x - rho) >= math.pi / 2)
    for idx in np.flatnonzero(bad):
        x[idx] = refine_zero(int(ns[idx]), tol=tol)
    return _polish(x)


class NearestZero(NamedTuple):
    n: int
    defect: float


@dataclass(frozen=True, eq=False)
class ZeroTable:
    """Immutable table of the zeros r_n = j_{1,n}/(2 pi) with r_n <= r_max."""

    r_max: float
    refine_tol: float
    j_zeros: np.ndarray
    r_zeros: np.ndarray

    def __post_init__(self):
        for arr in (self.j_zeros, self.r_zeros):
            arr.setflags(write=False)

    @property
    def n_max(self) -> int:
        return int(self.r_zeros.size)

    def r(self, n: int) -> float:
        n = _check_index(n)
        if n > self.n_max:
            raise RangeError(f"zero {n} not in table (n_max={self.n_max})")
        return float(self.r_zeros[n - 1])

    def j(self, n: int) -> float:
        n = _check_index(n)
        if n > self.n_max:
            raise RangeError(f"zero {n} not in table (n_max={self.n_max})")
        return float(self.j_zeros[n - 1])

    def nearest(self, d):
        """Index (1-based) of the nearest r_n and the defect |d - r_n|.

        Accepts a scalar or an array of distances in (0, r_max].
        """
        arr = np.asarray(d, dtype=float)
        if np.any(~np.isfinite(arr)) or np.any(arr <= 0):
            raise DomainError("distances must be finite and positive")
        if np.any(arr > self.r_max):
            raise RangeError(f"distance {float(arr.max())} exceeds table range {self.r_max}")
        r = self.r_zeros
        pos = np.searchsorted(r, arr)
        left = np.clip(pos - 1, 0, r.size - 1)
        right = np.clip(pos, 0, r.size - 1)
        dl = np.abs(arr - r[left])
        dr = np.abs(arr - r[right])
        idx = np.where(dr < dl, right, left)
        defect = np.minimum(dl, dr)
        if arr.ndim == 0:
            return NearestZero(int(idx) + 1, float(defect))
        return idx + 1, defect

    def residuals(self) -> np.ndarray:
        """|J1(j_n)| at every stored zero."""
        return np.abs(np.asarray(bessel_j1(self.j_zeros), dtype=float))

    def certificate_ok(self) -> np.ndarray:
        """Per-zero residual certificate |J1(j)| <= 10 tol |J1'(j)|."""
        slope = np.abs(np.asarray(bessel_j1_prime(self.j_zeros), dtype=float))
        return self.residuals() <= 10 * self.refine_tol * slope

    def mcmahon_errors(self) -> np.ndarray:
        n = np.arange(1, self.n_max + 1, dtype=float)
        rho = _rho(n)
        return np.abs(rho + MCMAHON_K1 / rho - self.j_zeros)


def table_from_zeros(j_zeros, r_max: float, refine_tol: float = DEFAULT_REFINE_TOL) -> ZeroTable:
    """Wrap already computed zeros of J1 after re-checking their certificates."""
    j = np.array(j_zeros, dtype=float)
    if j.size == 0:
        raise EmptyTableError("no zeros given")
    if np.any(np.diff(j) <= 0):
        raise RefinementError("zeros are not strictly increasing")
    n = np.arange(1, j.size + 1, dtype=float)
    if np.any(np.abs(j - _rho(n)) >= math.pi / 2):
        raise RefinementError("a zero lies outside its McMahon bracket")
    table = ZeroTable(float(r_max), float(refine_tol), j, j / (2 * math.pi))
    if float(table.r_zeros[-1]) > r_max:
        raise RangeError("zeros exceed the declared r_max")
    ok = table.certificate_ok()
    if not ok.all():
        first = int(np.flatnonzero(~ok)[0]) + 1
        raise RefinementError(f"residual certificate fails at zero {first}")
    return table


def build_zero_table(r_max: float, refine_tol: float = DEFAULT_REFINE_TOL) -> ZeroTable:
    """Every zero r_n of ft_disk with r_n <= r_max, refined to ``refine_tol``."""
    if not math.isfinite(r_max) or r_max <= 0:
        raise DomainError(f"r_max must be positive, got {r_max}")
    if refine_tol <= 0:
        raise DomainError("refine_tol must be positive")
    count = int(2 * r_max) + 2
    while True:
        j = _refine_many(np.arange(1, count + 1), refine_tol)
        if j[-1] / (2 * math.pi) > r_max:
            break
        count *= 2
    j = j[j / (2 * math.pi) <= r_max]
    if j.size == 0:
        raise EmptyTableError(f"r_max={r_max} lies below the first zero")
    return table_from_zeros(j, r_max, refine_tol)


def zero_gap_defect(n: int, m: int, table: ZeroTable) -> float:
    """(r_m - r_n - (m-n)/2) * r_n**2 / max(1, m-n); bounded as n grows."""
    n, m = _check_index(n), _check_index(m)
    if m < n:
        raise DomainError(f"need m >= n, got n={n}, m={m}")
    rn, rm = table.r(n), table.r(m)
    return (rm - rn - (m - n) / 2) * rn * rn / max(1, m - n)


def gap_defect_sup(table: ZeroTable, n_lo: int, n_hi: int, max_gap: int) -> float:
    """sup of |zero_gap_defect(n, n+g)| over n_lo <= n <= n_hi, 1 <= g <= max_gap."""
    if n_hi + max_gap > table.n_max:
        raise RangeError("table too small for the requested sweep")
    r = table.r_zeros
    n = np.arange(n_lo, n_hi + 1)
    rn = r[n - 1]
    sup = 0.0
    for g in range(1, max_gap + 1):
        rm = r[n - 1 + g]
        sup = max(sup, float(np.max(np.abs(rm - rn - g / 2) * rn * rn / g)))
    return sup


class McMahonFit(NamedTuple):
    k1: float
    k3: float


def fit_mcmahon(table: ZeroTable, n_min: int = 20) -> McMahonFit:
    """Least-squares fit of j_n - rho_n = K1/rho_n + K3/rho_n**3 over n >= n_min."""
    n = np.arange(n_min, table.n_max + 1, dtype=float)
    if n.size < 2:
        raise RangeError("table too small to fit the expansion")
    rho = _rho(n)
    design = np.column_stack([1 / rho, 1 / rho ** 3])
    coef, *_ = np.linalg.lstsq(design, table.j_zeros[n_min - 1:] - rho, rcond=None)
    return McMahonFit(float(coef[0]), float(coef[1]))
