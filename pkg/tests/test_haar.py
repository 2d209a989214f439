import numpy as np
import pytest

from brickmemory.distance import annealed_distance_sq
from brickmemory.haar import (
    StateVector,
    brickwork_step,
    build_state_pair,
    cross_purity,
    folded_gate_check,
    haar_moment_check,
    haar_unitaries,
    haar_unitary,
    mc_annealed_distance_sq,
    mc_purities,
    realization_rng,
    state_profiles,
)
from brickmemory.validation import CircuitGeometry, ProfileError, SizeGuardError


def _random_state(q, two_l, seed):
    rng = np.random.default_rng(seed)
    v = rng.standard_normal(q**two_l) + 1j * rng.standard_normal(q**two_l)
    return StateVector(q, two_l, v / np.linalg.norm(v))


def test_haar_unitary_is_unitary():
    u = haar_unitary(5, np.random.default_rng(0))
    assert np.abs(u @ u.conj().T - np.eye(5)).max() < 1e-12
    batch = haar_unitaries(3, (4, 2), np.random.default_rng(1))
    assert batch.shape == (4, 2, 3, 3)
    with pytest.raises(ValueError):
        haar_unitary(1, np.random.default_rng(0))


def test_haar_moments():
    m = haar_moment_check(4, 4000, 3)
    assert m["unitarity_defect"] < 1e-12
    assert m["mean_z"] < 5 and m["second_moment_z"] < 5


def _gates(q, two_l, rng, identity=False):
    d = q * q
    n_out, n_in = two_l // 2, two_l // 2 - 1
    if identity:
        return [np.eye(d)] * n_out, [np.eye(d)] * n_in
    return list(haar_unitaries(d, n_out, rng)), list(haar_unitaries(d, n_in, rng))


def test_brickwork_identity_and_norm():
    s = _random_state(2, 6, 0)
    same = brickwork_step(s, _gates(2, 6, None, identity=True))
    assert np.allclose(same.amplitudes, s.amplitudes)
    rng = np.random.default_rng(1)
    for _ in range(5):
        s = brickwork_step(s, _gates(2, 6, rng))
        assert abs(s.norm() - 1) < 1e-10


def test_brickwork_two_sites_is_one_gate():
    s = _random_state(3, 2, 4)
    u = haar_unitary(9, np.random.default_rng(2))
    out = brickwork_step(s, ([u], []))
    assert np.allclose(out.amplitudes, u @ s.amplitudes)
    with pytest.raises(ValueError):
        brickwork_step(s, ([u, u], []))


def test_cross_purity_properties():
    a, b = _random_state(2, 6, 1), _random_state(2, 6, 2)
    assert cross_purity(a, b, 6) == pytest.approx(abs(np.vdot(a.amplitudes, b.amplitudes)) ** 2)
    assert cross_purity(a, b, 0) == pytest.approx(1)
    for x in range(7):
        assert cross_purity(a, b, x) == pytest.approx(cross_purity(b, a, x))
        pa, pb = cross_purity(a, a, x), cross_purity(b, b, x)
        assert 2 ** -x - 1e-12 <= pa <= 1 + 1e-12
        assert 2 * cross_purity(a, b, x) <= pa + pb + 1e-12


def test_size_guard():
    with pytest.raises(SizeGuardError):
        StateVector(2, 26, np.zeros(1))


def test_build_state_pair_examples():
    g = CircuitGeometry(2, 8, 3)
    a, b, info = build_state_pair("w", {"c1": 1, "c2": 0}, g)
    assert info["omega"] == pytest.approx(1)
    assert np.allclose(a.amplitudes, b.amplitudes)
    m = np.eye(2) / np.sqrt(2)
    _, _, info = build_state_pair("pair", {"m_e": m, "m_o": m}, g)
    assert info["beta"] == pytest.approx(1)
    _, _, info = build_state_pair("pair", {"beta": 0.7}, g)
    assert info["beta"] == pytest.approx(0.7) and info["gamma"] == pytest.approx(0.7)
    with pytest.raises(ProfileError):
        build_state_pair("pair", {"m_e": np.eye(2), "m_o": m}, g)
    with pytest.raises(ProfileError):
        build_state_pair("w", {"c1": 1, "c2": 0}, CircuitGeometry(3, 4, 1))


def test_pair_profile_from_states_is_beta_power():
    a, b, _ = build_state_pair("pair", {"beta": 0.6}, CircuitGeometry(2, 6, 1))
    cross, sa, sb = state_profiles(a, b)
    assert [float(v) for v in cross.values] == pytest.approx([0.6**y for y in range(7)])
    assert [float(v) for v in sa.values] == pytest.approx([1] * 7)


def test_identical_pair_estimates_exact_zero():
    g = CircuitGeometry(2, 6, 3)
    a, _, _ = build_state_pair("pair", {"beta": 0.5}, g)
    est = mc_annealed_distance_sq(g, lambda _: (a, a), 3, 200, 1)
    assert est.mean == 0 and est.stderr == 0


def test_time_zero_full_system():
    g = CircuitGeometry(2, 6, 6)
    a, b = _random_state(2, 6, 5), _random_state(2, 6, 6)
    ov = abs(np.vdot(a.amplitudes, b.amplitudes)) ** 2
    est = mc_annealed_distance_sq(g, lambda _: (a, b), 0, 100, 1)
    # both purities are one on the full chain
    assert est.mean == pytest.approx(1 - ov, abs=1e-12)


def test_mc_is_reproducible_and_chunk_independent():
    a, b, _ = build_state_pair("pair", {"beta": 0.7}, CircuitGeometry(2, 6, 1))
    args = (2, 6, [a, b], [(0, 1)], [1, 3], 2, 300, 11)
    s1 = mc_purities(*args, chunk=300)
    s2 = mc_purities(*args, chunk=70)
    s3 = mc_purities(*args, chunk=100, workers=2)
    assert np.array_equal(s1, s2) and np.array_equal(s1, s3)


def test_substreams_differ():
    x = realization_rng(1, 0).standard_normal(4)
    y = realization_rng(1, 1).standard_normal(4)
    assert not np.allclose(x, y)


def test_mc_agrees_with_engine_small():
    g = CircuitGeometry(2, 6, 3)
    a, b, _ = build_state_pair("pair", {"beta": 0.7}, g)
    cross, sa, sb = state_profiles(a, b)
    for t in (1, 2):
        est = mc_annealed_distance_sq(g, lambda _: (a, b), t, 3000, 5)
        exact = annealed_distance_sq(g, t, cross, sa, sb)
        assert abs(est.mean - exact) < 4 * est.stderr


def test_mc_rejects_bad_inputs():
    g = CircuitGeometry(2, 6, 3)
    with pytest.raises(ValueError):
        mc_annealed_distance_sq(g, lambda _: (None, None), 1, 50, 1)
    with pytest.raises(ProfileError):
        mc_annealed_distance_sq(g, lambda _: (None, None), 1, 100, 1)


def test_folded_gate():
    rep = folded_gate_check(4000, 9)
    assert rep.circle_residual < 1e-12 and rep.square_residual < 1e-12
    assert rep.alpha == pytest.approx(0.4)
    assert rep.mixed_residual < 5 / np.sqrt(rep.n)
    assert rep.off_span < 5 * rep.mixed_stderr + 5 / np.sqrt(rep.n)
    assert rep.passed()
