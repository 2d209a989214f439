"""Boundary-overlap profiles ``g(y) = <T_0(y)|Psi_4>`` for initial-state pairs.

``g(y)`` is the contraction of the replicated pair with ``2L - y`` circles on
the left and ``y`` squares on the right, i.e. ``tr[rho_B rho'_B]`` for ``B`` the
rightmost ``y`` sites. Every profile returns exact Fractions so the walk engine
can stay in rational arithmetic.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path

from .validation import ProfileError, as_exact

__all__ = [
    "OverlapProfile",
    "PairProduct",
    "WState",
    "UniformOne",
    "Tabulated",
    "MixedLongTime",
    "pair_product_profile",
    "w_state_profile",
    "omega_from_amplitudes",
    "exact_w_overlap",
    "exact_w_profile",
    "parse_profile",
    "self_profile",
]

_NORM_TOL = 1e-12


class OverlapProfile:
    """Base class; subclasses implement ``overlap(y, two_l)``."""

    def overlap(self, y: int, two_l: int) -> Fraction:
        raise NotImplementedError

    def _check_y(self, y: int, two_l: int) -> None:
        if not 0 <= y <= two_l:
            raise ProfileError(f"y={y} outside [0, {two_l}]")

    def table(self, two_l: int) -> list[Fraction]:
        return [self.overlap(y, two_l) for y in range(two_l + 1)]

    @property
    def finite_time(self) -> bool:
        return True


@dataclass(frozen=True)
class PairProduct(OverlapProfile):
    beta: Fraction
    gamma: Fraction

    def overlap(self, y, two_l):
        self._check_y(y, two_l)
        p = y % 2
        return self.beta ** (y - p) * self.gamma**p

    def overlap_sq(self, two_l: int) -> Fraction:
        return self.beta**two_l


@dataclass(frozen=True)
class WState(OverlapProfile):
    """Large-L overlap of the two-site shifted W pair.

    ``g(y) = ((2L - y)^2 + omega y^2) / (2L)^2``; the parity terms that vanish
    as 1/L are dropped (``exact_w_overlap`` keeps them).
    """

    omega: Fraction
    two_l: int

    def overlap(self, y, two_l):
        if two_l != self.two_l:
            raise ProfileError(f"profile built for 2L={self.two_l}, used with {two_l}")
        self._check_y(y, two_l)
        return Fraction((two_l - y) ** 2, two_l**2) + self.omega * Fraction(y * y, two_l**2)

    def overlap_sq(self, two_l: int) -> Fraction:
        return self.omega


@dataclass(frozen=True)
class UniformOne(OverlapProfile):
    """``g = 1``: self-overlap of any product state."""

    def overlap(self, y, two_l):
        self._check_y(y, two_l)
        return Fraction(1)

    def overlap_sq(self, two_l: int) -> Fraction:
        return Fraction(1)


@dataclass(frozen=True)
class Tabulated(OverlapProfile):
    values: tuple

    def __post_init__(self):
        vals = tuple(as_exact(v) for v in self.values)
        if len(vals) < 2:
            raise ProfileError("a tabulated profile needs at least two entries")
        object.__setattr__(self, "values", vals)

    @property
    def two_l(self) -> int:
        return len(self.values) - 1

    def overlap(self, y, two_l):
        if two_l != self.two_l:
            raise ProfileError(
                f"table has {self.two_l + 1} entries, expected {two_l + 1}"
            )
        self._check_y(y, two_l)
        return self.values[y]

    def overlap_sq(self, two_l: int) -> Fraction:
        return self.overlap(two_l, two_l)

    @classmethod
    def from_csv(cls, path) -> "Tabulated":
        """Read ``y,value`` rows (or a single value column) from a CSV file."""
        rows = []
        with open(Path(path), newline="") as fh:
            for rec in csv.reader(fh):
                if not rec or rec[0].lstrip().startswith("#"):
                    continue
                try:
                    rows.append([Fraction(c.strip()) for c in rec])
                except ValueError:
                    continue  # header line
        if not rows:
            raise ProfileError(f"no numeric rows in {path}")
        if len(rows[0]) == 1:
            return cls(tuple(r[0] for r in rows))
        table = {int(r[0]): r[1] for r in rows}
        n = max(table)
        if sorted(table) != list(range(n + 1)):
            raise ProfileError(f"{path}: y column must cover 0..{n}")
        return cls(tuple(table[y] for y in range(n + 1)))


@dataclass(frozen=True)
class MixedLongTime(OverlapProfile):
    """Mixed-state pair known only through its boundary contractions.

    ``cross = tr[rho(0) rho'(0)]``; the purities are ``q^(-2L s)`` and
    ``q^(-2L s')``. Only ``y = 0`` and ``y = 2L`` can be evaluated, so the
    profile is usable by infinite-time formulas only.
    """

    cross: Fraction
    s: Fraction
    s_prime: Fraction

    def __post_init__(self):
        for name in ("cross", "s", "s_prime"):
            object.__setattr__(self, name, as_exact(getattr(self, name)))
        if not (0 <= self.s <= 1 and 0 <= self.s_prime <= 1):
            raise ProfileError("s and s_prime must lie in [0, 1]")
        if self.cross < 0:
            raise ProfileError("cross overlap must be nonnegative")

    @property
    def finite_time(self) -> bool:
        return False

    def overlap(self, y, two_l):
        self._check_y(y, two_l)
        if y == 0:
            return Fraction(1)
        if y == two_l:
            return self.cross
        raise ProfileError(
            "mixed long-time profiles only define g(0) and g(2L); "
            "finite-time evaluation is not available"
        )

    def overlap_sq(self, two_l: int) -> Fraction:
        return self.cross


def pair_product_profile(beta, gamma=None) -> PairProduct:
    beta = as_exact(beta)
    gamma = beta if gamma is None else as_exact(gamma)
    if not (0 <= beta <= 1 and 0 <= gamma <= 1):
        raise ProfileError(f"beta and gamma must lie in [0, 1], got {beta}, {gamma}")
    if gamma == 0 and beta != 0:
        raise ProfileError("gamma = 0 requires beta = 0")
    return PairProduct(beta, gamma)


def omega_from_amplitudes(c1, c2) -> float:
    n1, n2 = abs(complex(c1)) ** 2, abs(complex(c2)) ** 2
    if abs(n1 + n2 - 1) > _NORM_TOL:
        raise ProfileError(f"|c1|^2 + |c2|^2 = {n1 + n2}, expected 1")
    return (n1 - n2) ** 2


def w_state_profile(c1=None, c2=None, two_l: int = None, *, omega=None) -> WState:
    """W-pair profile from amplitudes ``(c1, c2)`` or directly from ``omega``."""
    if two_l is None or two_l < 2 or two_l % 2:
        raise ProfileError(f"two_l must be a positive even integer, got {two_l}")
    if omega is None:
        if c1 is None or c2 is None:
            raise ProfileError("give either (c1, c2) or omega")
        omega = omega_from_amplitudes(c1, c2)
    omega = as_exact(omega)
    if not 0 <= omega <= 1:
        raise ProfileError(f"omega must lie in [0, 1], got {omega}")
    return WState(omega, two_l)


def _w_sums(c1: complex, c2: complex, two_l: int, y: int, shifted: bool):
    ell = two_l // 2
    sign = -1 if shifted else 1
    # excitations of |d_n> sit on site 2n (0-based, from the left); the
    # subsystem is the rightmost y sites
    inside = [n for n in range(ell) if 2 * n >= two_l - y]
    outside = [n for n in range(ell) if 2 * n < two_l - y]
    a = [c1 + c2 * (-1) ** n for n in range(ell)]
    b = [c1 + sign * c2 * (-1) ** n for n in range(ell)]
    p_out = sum(abs(a[n]) ** 2 for n in outside)
    pp_out = sum(abs(b[n]) ** 2 for n in outside)
    coh = sum(a[n] * b[n].conjugate() for n in inside)
    return (p_out * pp_out + abs(coh) ** 2) / ell**2


def exact_w_overlap(c1, c2, two_l: int, y: int, *, shifted: bool = True) -> float:
    """Finite-L overlap ``tr[rho_B(w) rho_B(w')]`` for qubit W states.

    Single-excitation states reduce to ``p0 |0><0| + |phi_B><phi_B|`` on any
    block ``B``, so the double sum over excitation positions collapses to
    single sums. With ``shifted=False`` the second state is ``w`` itself,
    giving the purity profile.
    """
    c1, c2 = complex(c1), complex(c2)
    omega_from_amplitudes(c1, c2)
    if two_l < 2 or two_l % 2:
        raise ProfileError(f"two_l must be a positive even integer, got {two_l}")
    if not 0 <= y <= two_l:
        raise ProfileError(f"y={y} outside [0, {two_l}]")
    return float(_w_sums(c1, c2, two_l, y, shifted))


def exact_w_profile(c1, c2, two_l: int, *, shifted: bool = True) -> Tabulated:
    return Tabulated(
        tuple(exact_w_overlap(c1, c2, two_l, y, shifted=shifted) for y in range(two_l + 1))
    )


def self_profile(profile: OverlapProfile, two_l: int) -> OverlapProfile:
    """Denominator profile for the unprimed state of a symmetric pair."""
    if isinstance(profile, WState):
        return WState(Fraction(1), profile.two_l)
    if isinstance(profile, UniformOne):
        return UniformOne()
    if isinstance(profile, PairProduct):
        # gamma != beta means entangled pairs, whose purities are not fixed by (beta, gamma)
        if profile.gamma != profile.beta:
            raise ProfileError("pair profiles with gamma != beta need an explicit self profile")
        return UniformOne()
    raise ProfileError(
        f"no canonical self profile for {type(profile).__name__}; pass it explicitly"
    )


def _kv(body: str) -> dict[str, str]:
    out = {}
    for part in filter(None, (p.strip() for p in body.split(","))):
        if "=" not in part:
            raise ProfileError(f"expected key=value, got {part!r}")
        k, v = part.split("=", 1)
        out[k.strip()] = v.strip()
    return out


def parse_profile(spec: str, two_l: int | None = None) -> OverlapProfile:
    """Parse the CLI profile mini-language.

    ``pair:beta=0.7[,gamma=0.7]``, ``w:omega=0.7``, ``w:c1=..,c2=..``,
    ``mixed:cross=..,s=..,sp=..``, ``table:@file.csv``.
    """
    if ":" not in spec:
        raise ProfileError(f"profile spec {spec!r} lacks a kind prefix")
    kind, body = spec.split(":", 1)
    kind = kind.strip().lower()
    if kind not in ("pair", "w", "mixed", "table"):
        raise ProfileError(f"unknown profile kind {kind!r}")
    if kind == "table":
        if not body.startswith("@"):
            raise ProfileError("table profiles are given as table:@file.csv")
        return Tabulated.from_csv(body[1:])
    kv = _kv(body)
    try:
        if kind == "pair":
            _only(kv, {"beta", "gamma"}, spec)
            return pair_product_profile(kv["beta"], kv.get("gamma"))
        if kind == "w":
            _only(kv, {"omega", "c1", "c2"}, spec)
            if "omega" in kv:
                return w_state_profile(two_l=two_l, omega=kv["omega"])
            return w_state_profile(complex(kv["c1"]), complex(kv["c2"]), two_l)
        if kind == "mixed":
            _only(kv, {"cross", "s", "sp"}, spec)
            return MixedLongTime(kv["cross"], kv["s"], kv["sp"])
    except KeyError as exc:
        raise ProfileError(f"profile {spec!r} is missing {exc.args[0]!r}") from None
    except ValueError as exc:
        if isinstance(exc, ProfileError):
            raise
        raise ProfileError(f"bad number in profile {spec!r}: {exc}") from None


def _only(kv: dict, allowed: set, spec: str) -> None:
    extra = set(kv) - allowed
    if extra:
        raise ProfileError(f"unknown keys {sorted(extra)} in profile {spec!r}")
