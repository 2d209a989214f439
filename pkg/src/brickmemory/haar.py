"""Brute-force Monte Carlo over explicit Haar brickwork circuits.

Small chains only: states are dense vectors of ``q^(2L)`` amplitudes. Every
realization draws its gates from its own substream, keyed on
``(seed, realization index)``, so estimates do not depend on chunking or on
the number of worker processes.
"""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .profiles import Tabulated, omega_from_amplitudes
from .validation import CircuitGeometry, ProfileError, SizeGuardError

__all__ = [
    "MAX_AMPLITUDES",
    "StateVector",
    "McEstimate",
    "haar_unitary",
    "haar_unitaries",
    "brickwork_step",
    "cross_purity",
    "build_state_pair",
    "state_profiles",
    "realization_rng",
    "mc_purities",
    "mc_annealed_distance_sq",
    "mc_all_to_all",
    "ratio_estimate",
    "folded_gate_check",
    "haar_moment_check",
]

MAX_AMPLITUDES = 2**24
_NORM_TOL = 1e-10


def _guard(q: int, two_l: int) -> None:
    if q**two_l > MAX_AMPLITUDES:
        raise SizeGuardError(
            f"q^(2L) = {q}^{two_l} exceeds the {MAX_AMPLITUDES}-amplitude guard"
        )


@dataclass
class StateVector:
    q: int
    two_l: int
    amplitudes: np.ndarray

    def __post_init__(self):
        _guard(self.q, self.two_l)
        self.amplitudes = np.asarray(self.amplitudes, dtype=complex).reshape(-1)
        if self.amplitudes.size != self.q**self.two_l:
            raise ValueError(
                f"expected {self.q ** self.two_l} amplitudes, got {self.amplitudes.size}"
            )

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def tensor(self) -> np.ndarray:
        return self.amplitudes.reshape((self.q,) * self.two_l)


@dataclass(frozen=True)
class McEstimate:
    mean: float
    stderr: float
    realizations: int
    seed: int


def haar_unitary(d: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-random ``d x d`` unitary: QR of a Ginibre matrix with R's diagonal
    phases divided out."""
    if d < 2:
        raise ValueError("d must be >= 2")
    return haar_unitaries(d, 1, rng)[0]


def haar_unitaries(d: int, size, rng: np.random.Generator) -> np.ndarray:
    """Stack of independent Haar unitaries, shape ``(*size, d, d)``."""
    size = (size,) if np.isscalar(size) else tuple(size)
    z = rng.standard_normal(size + (d, d, 2))
    return _qr_haar(z)


def _qr_haar(z: np.ndarray) -> np.ndarray:
    g = (z[..., 0] + 1j * z[..., 1]) / np.sqrt(2)
    qm, r = np.linalg.qr(g)
    diag = np.diagonal(r, axis1=-2, axis2=-1)
    return qm * (diag / np.abs(diag))[..., None, :]


def _apply_gate(psi: np.ndarray, gate: np.ndarray, site: int, q: int, lead: int) -> np.ndarray:
    # psi: (*batch, q, ..., q) with `lead` batch axes; gate: (batch0, q^2, q^2)
    # or (q^2, q^2); acts on sites (site, site + 1)
    ax = lead + site
    moved = np.moveaxis(psi, (ax, ax + 1), (-2, -1))
    shp = moved.shape
    flat = moved.reshape(shp[:-2] + (q * q,))
    if gate.ndim == 2:
        out = flat @ gate.T
    else:
        # batch axis 0 shared between gate and psi
        mid = flat.reshape(shp[0], -1, q * q)
        out = np.einsum("rab,rmb->rma", gate, mid).reshape(flat.shape)
    return np.moveaxis(out.reshape(shp), (-2, -1), (ax, ax + 1))


def _layer_sites(two_l: int) -> tuple[list[int], list[int]]:
    # L gates on (0,1), (2,3), ...; L-1 gates on (1,2), (3,4), ...
    return list(range(0, two_l, 2)), list(range(1, two_l - 1, 2))


def brickwork_step(state: StateVector, gates) -> StateVector:
    """One full time step: the ``L - 1`` inner gates act first, then the ``L``
    gates on pairs ``(0,1), (2,3), ...`` that sit next to the final boundary.

    ``gates`` is ``(outer_layer, inner_layer)`` with lengths ``L`` and ``L - 1``.
    """
    q, two_l = state.q, state.two_l
    outer, inner = gates
    outer_sites, inner_sites = _layer_sites(two_l)
    if len(outer) != len(outer_sites) or len(inner) != len(inner_sites):
        raise ValueError(
            f"need {len(outer_sites)} and {len(inner_sites)} gates, "
            f"got {len(outer)} and {len(inner)}"
        )
    psi = state.tensor()
    for site, u in zip(inner_sites, inner):
        psi = _apply_gate(psi, _check_gate(u, q), site, q, 0)
    for site, u in zip(outer_sites, outer):
        psi = _apply_gate(psi, _check_gate(u, q), site, q, 0)
    return StateVector(q, two_l, psi.reshape(-1))


def _check_gate(u, q):
    u = np.asarray(u, dtype=complex)
    if u.shape != (q * q, q * q):
        raise ValueError(f"gate must be {q * q}x{q * q}, got {u.shape}")
    return u


def _reduced(psi: np.ndarray, q: int, two_l: int, x: int) -> np.ndarray:
    # psi: (..., q^(2L)) -> rho_A over the rightmost x sites, (..., q^x, q^x)
    m = psi.reshape(psi.shape[:-1] + (q ** (two_l - x), q**x))
    return np.einsum("...ab,...ac->...bc", m, m.conj())


def cross_purity(state_a: StateVector, state_b: StateVector, x: int) -> float:
    """``tr[rho_A rho'_A]`` for ``A`` the rightmost ``x`` sites."""
    q, two_l = state_a.q, state_a.two_l
    if (state_b.q, state_b.two_l) != (q, two_l):
        raise ValueError("states live on different chains")
    if not 0 <= x <= two_l:
        raise ValueError(f"x={x} outside [0, {two_l}]")
    ra = _reduced(state_a.amplitudes, q, two_l, x)
    rb = _reduced(state_b.amplitudes, q, two_l, x)
    return float(np.vdot(rb, ra).real)


def _pair_state(q: int, two_l: int, m_odd: np.ndarray, m_even: np.ndarray) -> np.ndarray:
    # pair j = 1..L occupies sites (2j-2, 2j-1); odd j carries m_odd
    psi = np.ones(1, dtype=complex)
    for j in range(1, two_l // 2 + 1):
        m = m_odd if j % 2 else m_even
        psi = np.kron(psi, m.reshape(-1))
    return psi


def _check_pair_matrix(m, q) -> np.ndarray:
    m = np.asarray(m, dtype=complex)
    if m.shape != (q, q):
        raise ValueError(f"pair matrix must be {q}x{q}, got {m.shape}")
    if abs(np.linalg.norm(m) - 1) > 1e-12:
        raise ProfileError("pair states must be normalized (Frobenius norm 1)")
    return m


def build_state_pair(kind: str, params: dict, geom: CircuitGeometry):
    """Concrete initial pair plus overlap descriptors measured from it.

    ``kind="pair"``: two-site pair-product states; pass normalized ``m_e`` and
    ``m_o`` (``q x q``) or just ``beta``, which builds ``m = a (x) a`` from
    single-site states with ``|<a_e|a_o>|^2 = beta`` so that ``g(y) = beta^y``.
    The primed state swaps ``m_e`` and ``m_o``.

    ``kind="w"``: qubit W states with amplitudes ``c1 +/- c2 (-1)^n`` on the
    excitation at site ``2n``.

    Returns ``(psi, psi_prime, info)``.
    """
    q, two_l = geom.q, geom.two_l
    _guard(q, two_l)
    if kind == "pair":
        if "beta" in params:
            beta = float(params["beta"])
            if not 0 <= beta <= 1:
                raise ProfileError("beta must lie in [0, 1]")
            a_e = np.zeros(q, dtype=complex)
            a_e[0] = 1
            a_o = np.zeros(q, dtype=complex)
            a_o[0], a_o[1] = np.sqrt(beta), np.sqrt(1 - beta)
            m_e, m_o = np.outer(a_e, a_e), np.outer(a_o, a_o)
        else:
            m_e = _check_pair_matrix(params["m_e"], q)
            m_o = _check_pair_matrix(params["m_o"], q)
        psi = _pair_state(q, two_l, m_o, m_e)
        psi_p = _pair_state(q, two_l, m_e, m_o)
        info = {
            "beta": float(abs(np.vdot(m_e, m_o))),
            "gamma": float(np.trace(m_e @ m_e.conj().T @ m_o @ m_o.conj().T).real),
            "gamma_right": float(
                np.trace(m_e.T @ m_e.conj() @ m_o.T @ m_o.conj()).real
            ),
        }
    elif kind == "w":
        if q != 2:
            raise ProfileError("W states are defined for q = 2")
        c1, c2 = complex(params["c1"]), complex(params["c2"])
        omega_from_amplitudes(c1, c2)
        ell = two_l // 2
        psi = np.zeros(2**two_l, dtype=complex)
        psi_p = np.zeros_like(psi)
        for n in range(ell):
            idx = 1 << (two_l - 1 - 2 * n)  # site 2n, site 0 most significant
            psi[idx] = (c1 + c2 * (-1) ** n) / np.sqrt(ell)
            psi_p[idx] = (c1 - c2 * (-1) ** n) / np.sqrt(ell)
        # for odd L the alternating sum leaves a cross term in the norm
        psi /= np.linalg.norm(psi)
        psi_p /= np.linalg.norm(psi_p)
        info = {"omega": float(abs(np.vdot(psi, psi_p)) ** 2)}
    else:
        raise ProfileError(f"unknown state kind {kind!r}")
    a, b = StateVector(q, two_l, psi), StateVector(q, two_l, psi_p)
    for s in (a, b):
        if abs(s.norm() - 1) > _NORM_TOL:
            raise ProfileError("constructed state is not normalized")
    return a, b, info


def state_profiles(state_a: StateVector, state_b: StateVector):
    """Exact overlap profiles (cross, self_a, self_b) of a concrete pair."""
    two_l = state_a.two_l
    ys = range(two_l + 1)
    return (
        Tabulated(tuple(cross_purity(state_a, state_b, y) for y in ys)),
        Tabulated(tuple(cross_purity(state_a, state_a, y) for y in ys)),
        Tabulated(tuple(cross_purity(state_b, state_b, y) for y in ys)),
    )


def realization_rng(seed: int, index: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(index,))))


def _draw_circuits(q: int, two_l: int, steps: int, seed: int, start: int, stop: int):
    n_outer, n_inner = len(_layer_sites(two_l)[0]), len(_layer_sites(two_l)[1])
    d = q * q
    per = steps * (n_outer + n_inner)
    z = np.empty((stop - start, max(per, 1), d, d, 2))
    for i in range(start, stop):
        if per:
            z[i - start] = realization_rng(seed, i).standard_normal((per, d, d, 2))
    u = _qr_haar(z[:, :per]) if per else np.empty((stop - start, 0, d, d), complex)
    return u.reshape(stop - start, steps, n_outer + n_inner, d, d)


def _chunk_purities(args):
    q, two_l, states, xs, steps, seed, start, stop, pairs = args
    gates = _draw_circuits(q, two_l, steps, seed, start, stop)
    r = stop - start
    outer_sites, inner_sites = _layer_sites(two_l)
    n_outer = len(outer_sites)
    psi = np.broadcast_to(states, (r,) + states.shape).copy()
    psi = psi.reshape((r, states.shape[0]) + (q,) * two_l)
    out = np.empty((r, steps + 1, len(xs), len(pairs), 3))
    for t in range(steps + 1):
        if t:
            g = gates[:, t - 1]
            for j, site in enumerate(inner_sites):
                psi = _apply_gate(psi, g[:, n_outer + j], site, q, 2)
            for j, site in enumerate(outer_sites):
                psi = _apply_gate(psi, g[:, j], site, q, 2)
        flat = psi.reshape(r, states.shape[0], -1)
        for ix, x in enumerate(xs):
            rho = _reduced(flat, q, two_l, x)
            for ip, (ia, ib) in enumerate(pairs):
                ra, rb = rho[:, ia], rho[:, ib]
                out[:, t, ix, ip, 0] = np.einsum("rbc,rbc->r", ra, rb.conj()).real
                out[:, t, ix, ip, 1] = np.einsum("rbc,rbc->r", ra, ra.conj()).real
                out[:, t, ix, ip, 2] = np.einsum("rbc,rbc->r", rb, rb.conj()).real
    return out


def mc_purities(
    q: int,
    two_l: int,
    states: Sequence[StateVector],
    pairs: Sequence[tuple[int, int]],
    xs: Sequence[int],
    steps: int,
    n: int,
    seed: int,
    *,
    chunk: int = 500,
    workers: int = 1,
) -> np.ndarray:
    """Per-realization purities under shared circuits.

    Returns an array of shape ``(n, steps + 1, len(xs), len(pairs), 3)`` whose
    last axis holds ``(tr rho_a rho_b, tr rho_a^2, tr rho_b^2)``. All states are
    evolved by the same gates within a realization.
    """
    _guard(q, two_l)
    # identical inputs share one slot so cross and self purities agree bitwise
    unique: list[np.ndarray] = []
    slot = []
    for s in states:
        for i, u in enumerate(unique):
            if np.array_equal(u, s.amplitudes):
                slot.append(i)
                break
        else:
            slot.append(len(unique))
            unique.append(s.amplitudes)
    stack = np.stack(unique)
    pairs = [(slot[a], slot[b]) for a, b in pairs]
    tasks = [
        (q, two_l, stack, list(xs), steps, seed, lo, min(lo + chunk, n), pairs)
        for lo in range(0, n, chunk)
    ]
    if workers > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(workers) as pool:
            parts = list(pool.map(_chunk_purities, tasks))
    else:
        parts = [_chunk_purities(t) for t in tasks]
    return np.concatenate(parts, axis=0)


def ratio_estimate(samples: np.ndarray, seed: int) -> McEstimate:
    """``1 - 2 mean(cross) / (mean(self_a) + mean(self_b))`` with a delta-method
    standard error; ``samples`` has shape ``(n, 3)``."""
    n = samples.shape[0]
    xm, ym, zm = samples.mean(axis=0)
    s = ym + zm
    one_minus = 2 * xm / s
    g_cross, g_self = -2 / s, one_minus / s
    # elementwise (no fused multiply-add) so identical columns cancel exactly
    lin = g_cross * samples[:, 0] + (g_self * samples[:, 1] + g_self * samples[:, 2])
    stderr = float(lin.std(ddof=1) / np.sqrt(n)) if n > 1 else float("inf")
    return McEstimate(float(1 - one_minus), stderr, n, seed)


def mc_annealed_distance_sq(
    geom: CircuitGeometry,
    pair_builder: Callable[[CircuitGeometry], tuple],
    t: int,
    n: int,
    seed: int,
    *,
    workers: int = 1,
) -> McEstimate:
    """Sample-mean estimate of the annealed distance at time ``t``."""
    if n < 100:
        raise ValueError("n must be at least 100")
    built = pair_builder(geom)
    a, b = built[0], built[1]
    if not isinstance(a, StateVector) or not isinstance(b, StateVector):
        raise ProfileError("pair builder must return two StateVectors")
    samples = mc_purities(
        geom.q, geom.two_l, [a, b], [(0, 1)], [geom.x], t, n, seed, workers=workers
    )
    return ratio_estimate(samples[:, t, 0, 0], seed)


def mc_all_to_all(
    geom: CircuitGeometry, state_a: StateVector, state_b: StateVector, n: int, seed: int
) -> McEstimate:
    """``<tr[rho_A rho'_A]>`` when one global Haar unitary replaces the circuit."""
    q, two_l = geom.q, geom.two_l
    dim = q**two_l
    if dim > 2**12:
        raise SizeGuardError("global Haar sampling is limited to 4096 dimensions")
    vals = np.empty(n)
    for i in range(n):
        u = haar_unitary(dim, realization_rng(seed, i))
        a = StateVector(q, two_l, u @ state_a.amplitudes)
        b = StateVector(q, two_l, u @ state_b.amplitudes)
        vals[i] = cross_purity(a, b, geom.x)
    return McEstimate(float(vals.mean()), float(vals.std(ddof=1) / np.sqrt(n)), n, seed)


def _replica_states(q: int) -> dict[str, np.ndarray]:
    eye = np.eye(q)
    circ = np.einsum("ab,cd->abcd", eye, eye)  # (r1 r2)(r3 r4) paired
    sq = np.einsum("ad,bc->abcd", eye, eye)  # (r1 r4)(r2 r3) paired
    out = {}
    for name, (s1, s2) in {
        "oo": (circ, circ),
        "ss": (sq, sq),
        "os": (circ, sq),
        "so": (sq, circ),
    }.items():
        # indices: site1 (r1..r4), site2 (r1..r4) -> replica-major (q^2)^4
        t = np.einsum("abcd,efgh->aebfcgdh", s1, s2).reshape((q * q,) * 4)
        out[name] = t.astype(complex)
    return out


def _fold(u: np.ndarray, t: np.ndarray) -> np.ndarray:
    # apply U (x) U* (x) U (x) U* to a four-replica tensor, batched over u
    uc = u.conj()
    t = np.einsum("nai,ijkl->najkl", u, t)
    t = np.einsum("nbj,najkl->nabkl", uc, t)
    t = np.einsum("nck,nabkl->nabcl", u, t)
    return np.einsum("ndl,nabcl->nabcd", uc, t)


@dataclass
class FoldedGateReport:
    n: int
    q: int
    circle_residual: float
    square_residual: float
    mixed_residual: float
    mixed_stderr: float
    off_span: float
    alpha: float
    coefficients: tuple = field(default=())

    def passed(self, tol_unitary: float = 1e-12, k: float = 5.0) -> bool:
        return (
            self.circle_residual < tol_unitary
            and self.square_residual < tol_unitary
            and self.mixed_residual < k / np.sqrt(self.n)
        )


def folded_gate_check(n: int, seed: int, q: int = 2, *, chunk: int = 2000) -> FoldedGateReport:
    """Check the averaged folded gate on the replica boundary states.

    Circle-circle and square-square are fixed by every single gate; the mixed
    state must average to ``alpha (|oo> + |ss>)``.
    """
    if n < 1000:
        raise ValueError("n must be at least 1000")
    states = _replica_states(q)
    d = q * q
    max_oo = max_ss = 0.0
    acc = np.zeros_like(states["os"])
    acc2 = np.zeros(states["os"].shape)
    for lo in range(0, n, chunk):
        hi = min(lo + chunk, n)
        z = np.stack([realization_rng(seed, i).standard_normal((d, d, 2)) for i in range(lo, hi)])
        u = _qr_haar(z)
        max_oo = max(max_oo, float(np.abs(_fold(u, states["oo"]) - states["oo"]).max()))
        max_ss = max(max_ss, float(np.abs(_fold(u, states["ss"]) - states["ss"]).max()))
        img = _fold(u, states["os"])
        acc += img.sum(axis=0)
        acc2 += (np.abs(img) ** 2).sum(axis=0)
    mean = acc / n
    var = np.maximum(acc2 / n - np.abs(mean) ** 2, 0) * n / (n - 1)
    alpha = q / (q * q + 1)
    target = alpha * (states["oo"] + states["ss"])
    diff = mean - target
    basis = np.stack([states["oo"].reshape(-1), states["ss"].reshape(-1)], axis=1)
    coef, *_ = np.linalg.lstsq(basis, mean.reshape(-1), rcond=None)
    off = mean.reshape(-1) - basis @ coef
    return FoldedGateReport(
        n=n,
        q=q,
        circle_residual=max_oo,
        square_residual=max_ss,
        mixed_residual=float(np.abs(diff).max()),
        mixed_stderr=float(np.sqrt(var.max() / n)),
        off_span=float(np.abs(off).max()),
        alpha=alpha,
        coefficients=tuple(complex(c) for c in coef),
    )


def haar_moment_check(d: int, n: int, seed: int) -> dict:
    """z-scores of the first two Haar moments over ``n`` draws.

    Returns the worst ``|z|`` for ``E[U_ij] = 0`` and ``E|U_ij|^2 = 1/d`` and the
    worst unitarity defect.
    """
    u = np.stack([haar_unitary(d, realization_rng(seed, i)) for i in range(n)])
    m1 = u.mean(axis=0)
    se1 = np.sqrt((np.abs(u - m1) ** 2).sum(axis=0) / (n - 1) / n)
    p = np.abs(u) ** 2
    m2 = p.mean(axis=0)
    se2 = p.std(axis=0, ddof=1) / np.sqrt(n)
    defect = np.abs(np.einsum("nij,nkj->nik", u, u.conj()) - np.eye(d)).max()
    return {
        "mean_z": float((np.abs(m1) / se1).max()),
        "second_moment_z": float((np.abs(m2 - 1 / d) / se2).max()),
        "unitarity_defect": float(defect),
    }
