"""Full-step transfer matrix for the domain wall, with boundary dissipation.

At even row counts the wall sits on odd positions, so the boundary state is a
vector over ``L + 2`` entries: the all-circle state, walls at ``1, 3, ...,
2L - 1`` and the all-square state. Matrices act on columns,
``W_new[to] = sum_from A[to, from] W[from]``, and one application is one full
time step (two rows of gates).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .profiles import OverlapProfile
from .validation import CircuitGeometry, as_exact, check_engine_geometry
from .walkcoeff import q_n

__all__ = [
    "DomainWallVector",
    "DissipationSchedule",
    "positions",
    "build_a0",
    "build_p",
    "build_dissipative",
    "indicator",
    "evolve",
    "contract",
    "left_eigenvector_q",
    "first_order_shift",
    "perturbed_eigenvalue",
    "dissipative_eigenvalue",
    "markov_distance_sq",
    "open_longtime_distance",
    "critical_a",
    "critical_r",
]


def positions(geom: CircuitGeometry) -> list[int]:
    """Wall position for each vector entry."""
    ell = geom.half
    return [0] + [2 * i - 1 for i in range(1, ell + 1)] + [geom.two_l]


def _zeros(n: int, exact: bool):
    if exact:
        return np.array([[Fraction(0)] * n for _ in range(n)], dtype=object)
    return np.zeros((n, n))


def build_a0(geom: CircuitGeometry, *, exact: bool = False) -> np.ndarray:
    """Unitary-circuit transfer matrix; ``exact`` gives an object array of Fractions."""
    ell = geom.half
    n = ell + 2
    alpha = geom.alpha if exact else float(geom.alpha)
    a2 = alpha * alpha
    mat = _zeros(n, exact)
    mat[0, 0] = 1
    mat[n - 1, n - 1] = 1
    for j in range(1, ell + 1):
        y = 2 * j - 1
        for first in (y - 1, y + 1):
            if first == 0:
                mat[0, j] += alpha
            elif first == geom.two_l:
                mat[n - 1, j] += alpha
            else:
                for second in (first - 1, first + 1):
                    mat[(second + 1) // 2, j] += a2
    return mat


def build_p(geom: CircuitGeometry, *, exact: bool = False) -> np.ndarray:
    """Dissipation generator: leakage out of the all-square state on the far edge."""
    n = geom.half + 2
    q = geom.q
    alpha = geom.alpha if exact else float(geom.alpha)
    one_over_q = Fraction(1, q) if exact else 1.0 / q
    mat = _zeros(n, exact)
    mat[n - 2, n - 2] = alpha * one_over_q
    mat[n - 2, n - 1] = one_over_q
    mat[n - 1, n - 2] = -alpha
    mat[n - 1, n - 1] = -1
    return mat


@dataclass(frozen=True)
class DissipationSchedule:
    """``p = a (L / T)^exponent`` for amplitude ``a`` and circuit depth ``T``."""

    a: float
    depth: int
    exponent: float = 1.0

    def __post_init__(self):
        if self.a < 0:
            raise ValueError(f"amplitude a must be >= 0, got {self.a}")
        if self.exponent <= 0:
            raise ValueError(f"exponent must be > 0, got {self.exponent}")
        if int(self.depth) != self.depth or self.depth < 1:
            raise ValueError(f"depth must be a positive integer, got {self.depth}")

    def p(self, geom: CircuitGeometry) -> float:
        val = self.a * (geom.half / self.depth) ** self.exponent
        if not 0 <= val <= 1:
            raise ValueError(f"dissipation p = {val} outside [0, 1]")
        return val

    def p_exact(self, geom: CircuitGeometry) -> Fraction:
        if self.exponent != 1:
            raise ValueError("exact dissipation needs exponent = 1")
        val = as_exact(self.a) * Fraction(geom.half, int(self.depth))
        if not 0 <= val <= 1:
            raise ValueError(f"dissipation p = {val} outside [0, 1]")
        return val


def build_dissipative(
    geom: CircuitGeometry, sched: DissipationSchedule, *, exact: bool = False
) -> np.ndarray:
    p = sched.p_exact(geom) if exact else sched.p(geom)
    return build_a0(geom, exact=exact) + p * build_p(geom, exact=exact)


@dataclass(frozen=True)
class DomainWallVector:
    geometry: CircuitGeometry
    entries: np.ndarray

    def __post_init__(self):
        if len(self.entries) != self.geometry.half + 2:
            raise ValueError(
                f"expected {self.geometry.half + 2} entries, got {len(self.entries)}"
            )

    def as_dict(self) -> dict:
        return dict(zip(positions(self.geometry), self.entries))


def indicator(geom: CircuitGeometry, *, exact: bool = False) -> DomainWallVector:
    """Boundary state with the wall at the subsystem cut ``x``.

    ``x`` is odd, or 0 / 2L for the uniform states.
    """
    n = geom.half + 2
    if geom.x == 0:
        slot = 0
    elif geom.x == geom.two_l:
        slot = n - 1
    else:
        check_engine_geometry(geom)
        slot = (geom.x + 1) // 2
    if exact:
        vec = np.array([Fraction(0)] * n, dtype=object)
    else:
        vec = np.zeros(n)
    vec[slot] = 1
    return DomainWallVector(geom, vec)


def evolve(mat: np.ndarray, w0: DomainWallVector, steps: int) -> DomainWallVector:
    if steps < 0:
        raise ValueError("steps must be nonnegative")
    if mat.shape != (len(w0.entries),) * 2:
        raise ValueError(f"matrix {mat.shape} does not match vector {len(w0.entries)}")
    vec = w0.entries
    if vec.dtype == object:
        for _ in range(steps):
            vec = mat.dot(vec)
    else:
        vec = np.linalg.matrix_power(mat, steps) @ vec if steps else vec.copy()
    return DomainWallVector(w0.geometry, vec)


def contract(w: DomainWallVector, g: OverlapProfile):
    two_l = w.geometry.two_l
    exact = w.entries.dtype == object
    total = Fraction(0) if exact else 0.0
    for y, coeff in zip(positions(w.geometry), w.entries):
        if coeff:
            val = g.overlap(y, two_l)
            total += coeff * (val if exact else float(val))
    return total


def left_eigenvector_q(geom: CircuitGeometry) -> np.ndarray:
    """Left unit eigenvector of A0 orthogonal to the all-circle state.

    Entries are ``(0, Q_0, Q_2, ..., Q_{2L-2}, Q_{2L-1})`` with
    ``Q_N = q^-N (q^(2N+2) - 1) / (q^2 - 1)``, normalized so the wall-at-1
    entry is one.
    """
    ell = geom.half
    vec = [Fraction(0)] + [q_n(geom, 2 * j) for j in range(ell)] + [q_n(geom, 2 * ell - 1)]
    return np.array(vec, dtype=object)


def first_order_shift(geom: CircuitGeometry) -> Fraction:
    """``L P R / L R`` for the all-square eigenvector; equals
    ``-(1 - q^-2) / (1 - q^-4L)``."""
    left = left_eigenvector_q(geom)
    pm = build_p(geom, exact=True)
    right = np.array([Fraction(0)] * (geom.half + 2), dtype=object)
    right[-1] = Fraction(1)
    return left.dot(pm.dot(right)) / left.dot(right)


def perturbed_eigenvalue(geom: CircuitGeometry, sched: DissipationSchedule) -> float:
    """First-order estimate of the subleading-unit eigenvalue of the dissipative matrix."""
    return 1.0 + sched.p(geom) * float(first_order_shift(geom))


def dissipative_eigenvalue(geom: CircuitGeometry, sched: DissipationSchedule) -> float:
    """Largest eigenvalue of the dissipative matrix once the exact all-circle
    eigenvalue is removed.

    Column 0 is the fixed all-circle state, so the rest of the spectrum is that
    of the trailing block.
    """
    mat = build_dissipative(geom, sched)
    block = mat[1:, 1:]
    ev = np.linalg.eigvals(block)
    return float(ev[np.argmax(ev.real)].real)


def markov_distance_sq(
    geom: CircuitGeometry,
    sched: DissipationSchedule,
    cross: OverlapProfile,
    self_a: OverlapProfile,
    self_b: OverlapProfile | None = None,
    steps: int | None = None,
) -> float:
    """Distance after ``steps`` (default: the schedule depth) dissipative steps."""
    mat = build_dissipative(geom, sched)
    w = evolve(mat, indicator(geom), sched.depth if steps is None else steps)
    c = contract(w, cross)
    sa = contract(w, self_a)
    sb = sa if self_b is None else contract(w, self_b)
    return 1.0 - 2.0 * c / (sa + sb)


def open_longtime_distance(geom: CircuitGeometry, a: float, omega) -> float:
    """Late-time W-pair distance with dissipation decaying as 1/T."""
    q, two_l, x = geom.q, geom.two_l, geom.x
    w = float(omega)
    ell = geom.half
    # log of the damped all-square weight relative to the all-circle one
    log_ratio = -a * ell * (1 - 1 / q**2) + (2 * x - two_l) * math.log(q)
    if log_ratio > 700:
        return 1 - w
    rho = math.exp(log_ratio)
    return 1 - (1 + w * rho) / (1 + rho)


def critical_a(geom: CircuitGeometry) -> float:
    q = geom.q
    r = geom.x / geom.two_l
    return (2 * r - 1) * q * q * math.log(q) / (q * q - 1)


def critical_r(geom: CircuitGeometry, a: float) -> float:
    q = geom.q
    return 0.5 + a * (q * q - 1) / (2 * q * q * math.log(q))
