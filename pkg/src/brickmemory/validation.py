"""Input validation helpers and the package's exception types."""

from __future__ import annotations

import numbers
from dataclasses import dataclass
from fractions import Fraction

__all__ = [
    "GeometryError",
    "ProfileError",
    "CriticalPointError",
    "SizeGuardError",
    "as_exact",
    "CircuitGeometry",
    "check_geometry",
    "check_engine_geometry",
    "check_times",
]


class GeometryError(ValueError):
    pass


class ProfileError(ValueError):
    pass


class CriticalPointError(ValueError):
    """Raised where a closed form is undefined (x = L, r = 1/2)."""


class SizeGuardError(RuntimeError):
    """Raised when a brute-force computation would exceed the memory guard."""


def as_exact(value) -> Fraction:
    """Convert a scalar to a Fraction.

    Floats go through their shortest decimal repr, so ``0.7`` becomes ``7/10``
    rather than the nearest binary fraction.
    """
    if isinstance(value, Fraction):
        return value
    if isinstance(value, numbers.Integral):
        return Fraction(int(value))
    if isinstance(value, str):
        return Fraction(value.strip())
    if isinstance(value, numbers.Real):
        f = float(value)
        if f != f or f in (float("inf"), float("-inf")):
            raise ValueError(f"non-finite value {value!r}")
        return Fraction(repr(f))
    raise TypeError(f"cannot convert {type(value).__name__} to an exact scalar")


@dataclass(frozen=True)
class CircuitGeometry:
    """Local dimension ``q``, total qudit count ``two_l`` and subsystem size ``x``.

    The subsystem is the rightmost ``x`` qudits. Any ``0 <= x <= two_l`` is
    accepted here so that closed forms can be swept over all cuts; the exact
    walk engine additionally requires odd ``x`` (see ``check_engine_geometry``).
    """

    q: int
    two_l: int
    x: int

    def __post_init__(self):
        for name in ("q", "two_l", "x"):
            v = getattr(self, name)
            if isinstance(v, bool) or not isinstance(v, numbers.Integral):
                raise GeometryError(f"{name} must be an integer, got {v!r}")
            object.__setattr__(self, name, int(v))
        if self.q < 2:
            raise GeometryError(f"q must be >= 2, got {self.q}")
        if self.two_l < 4 or self.two_l % 2:
            raise GeometryError(f"two_l must be even and >= 4, got {self.two_l}")
        if not 0 <= self.x <= self.two_l:
            raise GeometryError(f"x must lie in [0, {self.two_l}], got {self.x}")

    @property
    def half(self) -> int:
        return self.two_l // 2

    @property
    def alpha(self) -> Fraction:
        return Fraction(self.q, self.q * self.q + 1)

    @property
    def ratio(self) -> Fraction:
        return Fraction(self.x, self.two_l)

    def with_x(self, x: int) -> "CircuitGeometry":
        return CircuitGeometry(self.q, self.two_l, x)


def check_geometry(q, two_l, x) -> CircuitGeometry:
    if isinstance(q, CircuitGeometry):
        return q
    return CircuitGeometry(q, two_l, x)


def check_engine_geometry(geom: CircuitGeometry) -> CircuitGeometry:
    if not isinstance(geom, CircuitGeometry):
        raise TypeError("expected a CircuitGeometry")
    if geom.x % 2 == 0 or not 1 <= geom.x <= geom.two_l - 1:
        raise GeometryError(
            f"the exact engine needs odd x in [1, {geom.two_l - 1}], got x={geom.x}; "
            "the boundary condition for even cuts is not defined"
        )
    return geom


def check_times(times) -> list[int]:
    out = []
    for t in times:
        if isinstance(t, bool) or not isinstance(t, numbers.Integral) or t < 0:
            raise ValueError(f"times must be nonnegative integers, got {t!r}")
        out.append(int(t))
    return out
