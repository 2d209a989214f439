"""Domain-wall walk coefficients with absorbing boundaries.

Propagating the top boundary ``<o^(2L-x) s^x|`` down ``m`` rows of averaged
gates gives

    <T_m(x)| = A_m(x) <T_0(0)| + B_m(x) <T_0(2L)|
               + alpha^m sum_k C_{k,m}(x) <T_0(x - m + 2k)|

where ``C`` counts walks that never touch the walls at 0 and 2L, and ``A``/``B``
collect the alpha-weighted mass absorbed at either wall. Everything here is
exact: counts are Python integers and alpha-weighted sums are Fractions.
"""

from __future__ import annotations

import math
import threading
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache

from .validation import CircuitGeometry, GeometryError, check_engine_geometry

__all__ = [
    "binomial",
    "k_bounds",
    "r_coeff",
    "c_coeff",
    "c_coeff_oracle",
    "WalkOracle",
    "WalkCoefficientTable",
    "walk_table",
    "first_passage_counts",
    "a_coeff",
    "b_coeff",
    "a_infinity",
    "b_infinity",
    "a_infinity_series",
    "all_to_all",
    "q_n",
]


def binomial(m: int, k: int) -> int:
    """``C(m, k)`` with the convention that it vanishes outside ``0 <= k <= m``."""
    if m < 0:
        raise ValueError(f"m must be nonnegative, got {m}")
    if k < 0 or k > m:
        return 0
    return math.comb(m, k)


def k_bounds(geom: CircuitGeometry, m: int) -> tuple[int, int]:
    if m < 0:
        raise ValueError(f"m must be nonnegative, got {m}")
    x, two_l = geom.x, geom.two_l
    k_min = max(0, -((x - m) // 2))  # ceil((m - x) / 2)
    k_max = min(m, (m - x + two_l) // 2)
    return k_min, k_max


def _r(two_l: int, x: int, k: int, m: int) -> int:
    total = 0
    n = 1
    # past this n every binomial index is outside [0, m]
    while 2 * n * (two_l // 2) <= m + abs(k) + x:
        s = n * two_l
        total += (
            binomial(m, k + x + s)
            + binomial(m, k + x - s)
            - binomial(m, k + s)
            - binomial(m, k - s)
        )
        n += 1
    return total


def _c(two_l: int, x: int, k: int, m: int) -> int:
    return binomial(m, k) - binomial(m, k + x) - _r(two_l, x, k, m)


def r_coeff(geom: CircuitGeometry, k: int, m: int) -> int:
    """Image-charge correction from the wall at 2L and its periodic images."""
    if m < 0:
        raise ValueError(f"m must be nonnegative, got {m}")
    return _r(geom.two_l, geom.x, k, m)


def c_coeff(geom: CircuitGeometry, k: int, m: int) -> int:
    """Number of ``m``-step walks from ``x`` to ``x - m + 2k`` avoiding 0 and 2L."""
    check_engine_geometry(geom)
    k_min, k_max = k_bounds(geom, m)
    if not k_min <= k <= k_max:
        raise ValueError(f"k={k} outside [{k_min}, {k_max}] for m={m}")
    return _c(geom.two_l, geom.x, k, m)


def _pascal_row(m: int) -> list[int]:
    row = [1] * (m + 1)
    for j in range(m):
        row[j + 1] = row[j] * (m - j) // (j + 1)
    return row


@lru_cache(maxsize=8192)
def _c_row(two_l: int, x: int, m: int) -> tuple[int, ...]:
    k_min = max(0, -((x - m) // 2))
    k_max = min(m, (m - x + two_l) // 2)
    if m < 64:
        return tuple(_c(two_l, x, k, m) for k in range(k_min, k_max + 1))
    # same image sum as _c, reading binomials from one precomputed row
    row = _pascal_row(m)

    def b(j):
        return row[j] if 0 <= j <= m else 0

    out = []
    for k in range(k_min, k_max + 1):
        total = b(k) - b(k + x)
        n = 1
        while 2 * n * (two_l // 2) <= m + abs(k) + x:
            s = n * two_l
            total -= b(k + x + s) + b(k + x - s) - b(k + s) - b(k - s)
            n += 1
        out.append(total)
    return tuple(out)


@dataclass(frozen=True)
class WalkOracle:
    """Result of direct absorbing-walk propagation.

    ``surviving`` maps interior positions to path counts after ``m`` steps;
    ``absorbed_left`` / ``absorbed_right`` map the step at which mass hit the
    wall at 0 / 2L to the number of paths doing so.
    """

    m: int
    surviving: dict[int, int]
    absorbed_left: dict[int, int]
    absorbed_right: dict[int, int]

    def absorbed_weight(self, alpha: Fraction, side: str = "left") -> Fraction:
        tally = self.absorbed_left if side == "left" else self.absorbed_right
        return sum((alpha**step * n for step, n in tally.items()), Fraction(0))


def c_coeff_oracle(geom: CircuitGeometry, m: int) -> WalkOracle:
    """Brute-force the walk by repeated nearest-neighbour updates."""
    if m < 0:
        raise ValueError(f"m must be nonnegative, got {m}")
    two_l = geom.two_l
    d = {geom.x: 1}
    left: dict[int, int] = {}
    right: dict[int, int] = {}
    if geom.x in (0, two_l):
        # already a uniform boundary state; nothing walks
        side = left if geom.x == 0 else right
        side[0] = 1
        return WalkOracle(m, {}, left, right)
    for step in range(1, m + 1):
        nxt: dict[int, int] = {}
        for y, w in d.items():
            for y2 in (y - 1, y + 1):
                if y2 == 0:
                    left[step] = left.get(step, 0) + w
                elif y2 == two_l:
                    right[step] = right.get(step, 0) + w
                else:
                    nxt[y2] = nxt.get(y2, 0) + w
        d = nxt
    return WalkOracle(m, d, left, right)


_fp_cache: dict[tuple[int, int], list[int]] = {}
_fp_state: dict[tuple[int, int], tuple[int, list[int]]] = {}
_prefix_cache: dict[tuple[int, int, int], list[int]] = {}
_cache_lock = threading.Lock()


def first_passage_counts(two_l: int, x: int, k_max: int) -> list[int]:
    """``F[k] = C_{k, 2k+x-1}(x)``: paths first reaching 0 at step ``2k + x``.

    Propagates the surviving-path vector on the open strip one step at a time
    (integer additions only) and reads off the mass next to the left wall. The
    vector is memoized per (two_l, x) and grown on demand, so long series cost
    O(m 2L) big-integer additions instead of O(m^2 / L) large binomials.
    """
    if x <= 0 or x >= two_l:
        raise GeometryError(f"first passage needs 0 < x < 2L, got x={x}")
    key = (two_l, x)
    with _cache_lock:
        counts = _fp_cache.setdefault(key, [])
        if len(counts) <= k_max:
            step, vec = _fp_state.get(key, (0, None))
            if vec is None:
                vec = [0] * (two_l + 1)
                vec[x] = 1
            while len(counts) <= k_max:
                target = 2 * len(counts) + x - 1
                while step < target:
                    vec = [0] + [vec[i - 1] + vec[i + 1] for i in range(1, two_l)] + [0]
                    step += 1
                counts.append(vec[1])
            _fp_state[key] = (step, vec)
        return counts[: k_max + 1]


def _absorbed(q: int, two_l: int, x: int, m: int) -> Fraction:
    # sum_{k : 2k + x <= m} alpha^(x+2k) F[k], kept as an integer numerator
    # over (q^2+1)^(x+2K)
    if x == 0:
        return Fraction(1)
    if x == two_l:
        return Fraction(0)
    if m < x:
        return Fraction(0)
    k_top = (m - x) // 2
    key = (q, two_l, x)
    s = q * q + 1
    with _cache_lock:
        prefix = _prefix_cache.setdefault(key, [])
        have = len(prefix)
    if have <= k_top:
        counts = first_passage_counts(two_l, x, k_top)
        with _cache_lock:
            prefix = _prefix_cache[key]
            acc = prefix[-1] if prefix else 0
            for k in range(len(prefix), k_top + 1):
                acc = acc * s * s + counts[k] * q ** (x + 2 * k)
                prefix.append(acc)
    with _cache_lock:
        num = _prefix_cache[key][k_top]
    return Fraction(num, s ** (x + 2 * k_top))


def a_coeff(geom: CircuitGeometry, m: int) -> Fraction:
    """Alpha-weighted mass absorbed at the all-circle boundary within ``m`` rows."""
    if m < 0:
        raise ValueError(f"m must be nonnegative, got {m}")
    check_engine_geometry(geom)
    return _absorbed(geom.q, geom.two_l, geom.x, m)


def b_coeff(geom: CircuitGeometry, m: int) -> Fraction:
    """Same as ``a_coeff`` for the all-square boundary; equals A_m(2L - x)."""
    if m < 0:
        raise ValueError(f"m must be nonnegative, got {m}")
    check_engine_geometry(geom)
    return _absorbed(geom.q, geom.two_l, geom.two_l - geom.x, m)


@dataclass(frozen=True)
class WalkCoefficientTable:
    geometry: CircuitGeometry
    m: int
    c: dict[int, int] = field(repr=False)
    a: Fraction
    b: Fraction

    def position(self, k: int) -> int:
        return self.geometry.x - self.m + 2 * k

    def weights(self) -> dict[int, Fraction]:
        """Coefficient of every ``<T_0(y)|``, alpha powers included."""
        geom = self.geometry
        am = geom.alpha**self.m
        out = {0: self.a, geom.two_l: self.b}
        for k, ck in self.c.items():
            y = self.position(k)
            if ck:
                out[y] = out.get(y, Fraction(0)) + am * ck
        return out


def walk_table(geom: CircuitGeometry, m: int) -> WalkCoefficientTable:
    check_engine_geometry(geom)
    if m < 0:
        raise ValueError(f"m must be nonnegative, got {m}")
    k_min, _ = k_bounds(geom, m)
    row = _c_row(geom.two_l, geom.x, m)
    c = {k_min + i: v for i, v in enumerate(row)}
    return WalkCoefficientTable(
        geom, m, c, a_coeff(geom, m), b_coeff(geom, m)
    )


def _inf_closed(q: int, two_l: int, x: int) -> Fraction:
    # q^-x - 2 sinh(x ln q) / (q^(4L) - 1), with 2 sinh(x ln q) = q^x - q^-x
    qx = Fraction(q) ** x
    return 1 / qx - (qx - 1 / qx) / (q ** (2 * two_l) - 1)


def a_infinity(geom: CircuitGeometry) -> Fraction:
    return _inf_closed(geom.q, geom.two_l, geom.x)


def b_infinity(geom: CircuitGeometry) -> Fraction:
    return _inf_closed(geom.q, geom.two_l, geom.two_l - geom.x)


def _series_terms_needed(q: int, two_l: int, x: int, digits: float) -> int:
    # tail after K terms is at most (2a)^(2K+2+x) / (2 (1 - 4a^2))
    two_a = 2 * q / (q * q + 1)
    log_tail0 = math.log10(1 / (2 * (1 - two_a**2)))
    per = -2 * math.log10(two_a)
    k = (digits + log_tail0 - (x + 2) * (-math.log10(two_a))) / per
    return max(0, math.ceil(k) + 1)


def a_infinity_series(
    geom: CircuitGeometry, n_max: int | None = None
) -> tuple[Fraction, Fraction]:
    """Truncated first-passage series for A_inf and a rigorous tail bound.

    Returns ``(partial_sum, tail_bound)`` with
    ``partial_sum <= A_inf <= partial_sum + tail_bound``. Each term is
    ``alpha^(x+2k) C_{k,2k+x-1}(x)`` and ``C <= 2^(2k+x-1)`` bounds the tail by
    a geometric series in ``(2 alpha)^2 < 1``.

    By default ``n_max`` is chosen so the bound is below
    ``10^-(4L log10 q + 20)``.
    """
    q, two_l, x = geom.q, geom.two_l, geom.x
    if x == 0:
        return Fraction(1), Fraction(0)
    if x == two_l:
        return Fraction(0), Fraction(0)
    if n_max is None:
        digits = two_l * 2 * math.log10(q) + 20
        n_max = _series_terms_needed(q, two_l, x, digits)
    if n_max < 0:
        raise ValueError("n_max must be nonnegative")
    partial = _absorbed(q, two_l, x, x + 2 * n_max)
    two_a = Fraction(2 * q, q * q + 1)
    tail = two_a ** (2 * n_max + 2 + x) / (2 * (1 - two_a**2))
    return partial, tail


def all_to_all(geom: CircuitGeometry) -> tuple[Fraction, Fraction]:
    """(A_inf, B_inf) for a single Haar unitary on the whole chain.

    Uses the two-leg Haar identity with leg dimensions q^(2L-x) (traced within
    replicas) and q^x (swapped).
    """
    q, two_l, x = geom.q, geom.two_l, geom.x
    den = q ** (2 * two_l) - 1
    a = Fraction(q**x * (q ** (2 * (two_l - x)) - 1), den)
    b = Fraction(q ** (two_l - x) * (q ** (2 * x) - 1), den)
    return a, b


def q_n(geom: CircuitGeometry, n: int) -> Fraction:
    """``q^-N (q^(2N+2) - 1) / (q^2 - 1)``."""
    q = geom.q
    return Fraction(q ** (2 * n + 2) - 1, q**n * (q * q - 1))
