"""Annealed Frobenius distance between two reduced states at any time.

The averaged cross purity ``<tr[rho_A rho'_A]>`` after ``t`` steps is the
contraction of the propagated boundary state with an overlap profile,

    S_m(g) = A_m g(0) + B_m g(2L) + alpha^m sum_k C_{k,m} g(x - m + 2k),  m = 2t,

and the squared annealed distance is ``1 - 2 S(cross) / (S(self_a) + S(self_b))``.
The rest of the module holds the closed forms for special regimes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

from .profiles import MixedLongTime, OverlapProfile, self_profile
from .validation import (
    CircuitGeometry,
    CriticalPointError,
    ProfileError,
    as_exact,
    check_engine_geometry,
    check_times,
)
from .walkcoeff import a_infinity, b_infinity, walk_table

__all__ = [
    "DistanceSeries",
    "t_state_contraction",
    "contractions",
    "annealed_distance_sq",
    "distance_series",
    "infinite_time_pure",
    "infinite_time_limit",
    "infinite_time_exact",
    "infinite_time_mixed",
    "mixed_memory_threshold",
    "short_time_pair_product",
    "short_time_w",
    "entanglement_velocity",
    "asymptotic_w",
]

CLAMP = 1e-15


def _present(value: Fraction) -> float:
    v = float(value)
    if -CLAMP <= v < 0:
        return 0.0
    return v


def contractions(
    geom: CircuitGeometry, m: int, profiles: Sequence[OverlapProfile]
) -> list[Fraction]:
    """``S_m(g)`` for several profiles sharing one coefficient table."""
    table = walk_table(geom, m)
    two_l = geom.two_l
    am = geom.alpha**m
    out = []
    for g in profiles:
        interior = Fraction(0)
        for k, ck in table.c.items():
            if ck:
                interior += ck * g.overlap(table.position(k), two_l)
        total = am * interior
        if table.a:
            total += table.a * g.overlap(0, two_l)
        if table.b:
            total += table.b * g.overlap(two_l, two_l)
        out.append(total)
    return out


def t_state_contraction(geom: CircuitGeometry, m: int, g: OverlapProfile) -> Fraction:
    """Averaged overlap of ``m`` propagated rows with the profile ``g``.

    Exact rational; even ``m`` gives ``<tr[rho_A rho'_A]>`` at ``t = m / 2``.
    """
    return contractions(geom, m, [g])[0]


def _resolve_selves(cross, self_a, self_b, two_l):
    if self_a is None:
        self_a = self_profile(cross, two_l)
    if self_b is None:
        self_b = self_a
    return self_a, self_b


def _ratio_distance(c: Fraction, sa: Fraction, sb: Fraction) -> Fraction:
    den = sa + sb
    if den <= 0:
        raise ArithmeticError("vanishing purity denominator; profiles are inconsistent")
    return 1 - 2 * c / den


def annealed_distance_sq(
    geom: CircuitGeometry,
    t: int,
    cross: OverlapProfile,
    self_a: OverlapProfile | None = None,
    self_b: OverlapProfile | None = None,
    *,
    exact: bool = False,
):
    """Squared annealed distance after ``t`` full steps.

    ``self_a``/``self_b`` default to the canonical self profile of ``cross``
    (uniform for product pairs, omega = 1 for W pairs). Returns a float, or the
    exact Fraction when ``exact`` is set.
    """
    (t,) = check_times([t])
    check_engine_geometry(geom)
    self_a, self_b = _resolve_selves(cross, self_a, self_b, geom.two_l)
    if self_b is self_a:
        c, sa = contractions(geom, 2 * t, [cross, self_a])
        sb = sa
    else:
        c, sa, sb = contractions(geom, 2 * t, [cross, self_a, self_b])
    d = _ratio_distance(c, sa, sb)
    return d if exact else _present(d)


@dataclass(frozen=True)
class DistanceSeries:
    geometry: CircuitGeometry
    profile_pair: tuple
    times: tuple
    values: tuple
    exact_values: tuple | None = None


def distance_series(
    geom: CircuitGeometry,
    times: Iterable[int],
    cross: OverlapProfile,
    self_a: OverlapProfile | None = None,
    self_b: OverlapProfile | None = None,
    *,
    keep_exact: bool = False,
) -> DistanceSeries:
    times = tuple(sorted(set(check_times(times))))
    self_a, self_b = _resolve_selves(cross, self_a, self_b, geom.two_l)
    exact = tuple(
        annealed_distance_sq(geom, t, cross, self_a, self_b, exact=True) for t in times
    )
    return DistanceSeries(
        geom,
        (cross, self_a, self_b),
        times,
        tuple(_present(v) for v in exact),
        exact if keep_exact else None,
    )


def _pure_long_time(q: int, two_l: int, x: int, overlap_sq: Fraction) -> Fraction:
    lo = Fraction(1, q**x)
    hi = Fraction(q**x, q**two_l)
    return 1 - (lo + overlap_sq * hi) / (lo + hi)


def infinite_time_pure(geom: CircuitGeometry, overlap_sq, *, exact: bool = False):
    """Leading large-L value of the late-time distance for pure states.

    ``overlap_sq`` is ``|<Psi|Psi'>|^2`` on the whole chain.
    """
    ov = as_exact(overlap_sq)
    if not 0 <= ov <= 1:
        raise ValueError(f"overlap_sq must lie in [0, 1], got {overlap_sq}")
    d = _pure_long_time(geom.q, geom.two_l, geom.x, ov)
    return d if exact else _present(d)


def infinite_time_limit(r, overlap_sq) -> float:
    """Thermodynamic limit at fixed ratio ``r = x / 2L``."""
    r = as_exact(r)
    ov = as_exact(overlap_sq)
    if not 0 < r < 1:
        raise ValueError(f"r must lie in (0, 1), got {r}")
    if r == Fraction(1, 2):
        raise CriticalPointError("critical ratio r = 1/2: the limit is undefined")
    return 0.0 if r < Fraction(1, 2) else float(1 - ov)


def _mixed_purity(geom: CircuitGeometry, s: Fraction) -> MixedLongTime:
    exponent = geom.two_l * s
    if exponent.denominator == 1:
        purity = Fraction(1, geom.q ** int(exponent))
    else:
        purity = as_exact(geom.q ** (-float(exponent)))
    return MixedLongTime(purity, s, s)


def infinite_time_exact(
    geom: CircuitGeometry,
    cross: OverlapProfile,
    self_a: OverlapProfile | None = None,
    self_b: OverlapProfile | None = None,
    *,
    exact: bool = False,
):
    """Late-time distance from the exact A_inf, B_inf (all finite-L terms kept).

    Only ``g(0)`` and ``g(2L)`` enter, so ``MixedLongTime`` profiles work here.
    """
    two_l = geom.two_l
    if isinstance(cross, MixedLongTime) and self_a is None:
        self_a = _mixed_purity(geom, cross.s)
        self_b = _mixed_purity(geom, cross.s_prime)
    self_a, self_b = _resolve_selves(cross, self_a, self_b, two_l)
    a, b = a_infinity(geom), b_infinity(geom)

    def s(g):
        return a * g.overlap(0, two_l) + b * g.overlap(two_l, two_l)

    d = _ratio_distance(s(cross), s(self_a), s(self_b))
    return d if exact else _present(d)


def infinite_time_mixed(geom: CircuitGeometry, mixed: MixedLongTime) -> float:
    """Leading late-time distance for mixed initial states.

    Purities enter as ``q^(-2L s)``, ``q^(-2L s')``; the cross overlap must
    satisfy ``2 cross <= q^(-2L s) + q^(-2L s')``.
    """
    q, two_l, x = geom.q, geom.two_l, geom.x
    pa = q ** (-two_l * float(mixed.s))
    pb = q ** (-two_l * float(mixed.s_prime))
    cross = float(mixed.cross)
    if 2 * cross > (pa + pb) * (1 + 1e-12):
        raise ProfileError(
            f"cross overlap {cross} violates 2 tr[rho rho'] <= tr rho^2 + tr rho'^2"
        )
    lo = q ** (-x)
    hi = q ** (x - two_l)
    d = 1 - (2 * lo + 2 * cross * hi) / (2 * lo + (pa + pb) * hi)
    return 0.0 if -CLAMP <= d < 0 else d


def mixed_memory_threshold(s, s_prime) -> float:
    """Smallest ratio ``r`` at which mixed states can keep memory."""
    s, sp = as_exact(s), as_exact(s_prime)
    if not (0 <= s <= 1 and 0 <= sp <= 1):
        raise ValueError("s and s_prime must lie in [0, 1]")
    return float((1 + min(s, sp)) / 2)


def _check_window(geom: CircuitGeometry, t: int) -> None:
    check_engine_geometry(geom)
    (t,) = check_times([t])
    if not 2 * t < min(geom.x, geom.two_l - geom.x):
        raise ValueError(
            f"t={t} outside the boundary-free window 2t < min(x, 2L - x) "
            f"= {min(geom.x, geom.two_l - geom.x)}"
        )


def short_time_pair_product(geom: CircuitGeometry, t: int, beta, *, exact: bool = False):
    """``1 - beta^x ((1 + beta^2) / (2 beta))^(2t)``, valid while 2t < min(x, 2L - x)."""
    _check_window(geom, t)
    b = as_exact(beta)
    if not 0 < b <= 1:
        raise ValueError(f"beta must lie in (0, 1], got {beta}")
    d = 1 - b**geom.x * ((1 + b * b) / (2 * b)) ** (2 * t)
    return d if exact else _present(d)


def short_time_w(geom: CircuitGeometry, t: int, omega, *, exact: bool = False):
    _check_window(geom, t)
    w = as_exact(omega)
    two_l, x = geom.two_l, geom.x
    num = (two_l - x) ** 2 + w * x * x + 2 * (1 + w) * t
    den = (two_l - x) ** 2 + x * x + 4 * t
    d = 1 - num / den
    return d if exact else _present(d)


def entanglement_velocity(q: int) -> float:
    alpha = q / (q * q + 1)
    return -2 * math.log(2 * alpha) / math.log(q)


def asymptotic_w(geom: CircuitGeometry, t: float, omega) -> float:
    """Large-scale form of the W-pair distance, scaled by ``1 - omega``.

    The exponential front moves with the entanglement velocity; for ``x > L``
    the exponent is read as ``q^(x + v_e t - 2L)``.
    """
    q, two_l, x = geom.q, geom.two_l, geom.x
    if 2 * x == two_l:
        raise CriticalPointError("scaling form undefined at the critical cut x = L")
    w = float(omega)
    r = x / two_l
    v = entanglement_velocity(q)
    base = (1 - r) ** 2 + r * r
    if 2 * x < two_l:
        expo = (v * t - x) * math.log(q)
        front = math.exp(expo) if expo < 700 else math.inf
        return (1 - w) * r * r / (base + front)
    expo = (x + v * t - two_l) * math.log(q)
    front = math.exp(expo) if expo < 700 else math.inf
    return (1 - w) * (1 - (1 - r) ** 2 / (base + front))
