from fractions import Fraction

import numpy as np
import pytest

from brickmemory.distance import annealed_distance_sq, t_state_contraction
from brickmemory.markov import (
    DissipationSchedule,
    build_a0,
    build_dissipative,
    build_p,
    contract,
    critical_a,
    critical_r,
    dissipative_eigenvalue,
    evolve,
    first_order_shift,
    indicator,
    left_eigenvector_q,
    markov_distance_sq,
    open_longtime_distance,
    perturbed_eigenvalue,
)
from brickmemory.profiles import UniformOne, pair_product_profile, w_state_profile
from brickmemory.validation import CircuitGeometry

A = Fraction(2, 5)


def test_a0_small_chain():
    m = build_a0(CircuitGeometry(2, 4, 1), exact=True)
    expected = [
        [1, A, 0, 0],
        [0, A * A, A * A, 0],
        [0, A * A, A * A, 0],
        [0, 0, A, 1],
    ]
    assert m.tolist() == expected


def test_p_entries():
    p = build_p(CircuitGeometry(2, 6, 1), exact=True)
    assert p[-2, -2] == A / 2 and p[-2, -1] == Fraction(1, 2)
    assert p[-1, -2] == -A and p[-1, -1] == -1
    assert not p[:-2].any()


@pytest.mark.parametrize("two_l", [4, 10, 30])
def test_left_eigenvector(two_l):
    g = CircuitGeometry(2, two_l, 1)
    left = left_eigenvector_q(g)
    assert list(left.dot(build_a0(g, exact=True))) == list(left)
    assert left[0] == 0


def test_first_order_shift_exact():
    g = CircuitGeometry(2, 4, 1)
    assert first_order_shift(g) == Fraction(-64, 85)
    for two_l in (4, 8, 12):
        g = CircuitGeometry(3, two_l, 1)
        q = Fraction(3)
        assert first_order_shift(g) == -(1 - q**-2) / (1 - q ** (-2 * two_l))


def test_schedule_validation():
    with pytest.raises(ValueError):
        DissipationSchedule(-1, 10)
    with pytest.raises(ValueError):
        DissipationSchedule(1, 0)
    with pytest.raises(ValueError):
        DissipationSchedule(100, 10).p(CircuitGeometry(2, 20, 1))
    assert DissipationSchedule(0.5, 100).p_exact(CircuitGeometry(2, 20, 1)) == Fraction(1, 20)


def test_unperturbed_evolution_matches_walk_engine():
    g = CircuitGeometry(2, 12, 5)
    w0 = indicator(g, exact=True)
    a0 = build_a0(g, exact=True)
    prof = w_state_profile(two_l=12, omega=Fraction(3, 10))
    for t in range(8):
        assert contract(evolve(a0, w0, t), prof) == t_state_contraction(g, 2 * t, prof)


def test_markov_distance_without_dissipation():
    g = CircuitGeometry(2, 16, 11)
    prof = pair_product_profile(0.8)
    d = markov_distance_sq(g, DissipationSchedule(0, 25), prof, UniformOne())
    assert d == pytest.approx(annealed_distance_sq(g, 25, prof), abs=1e-13)


def test_dissipation_preserves_all_circle_state():
    g = CircuitGeometry(2, 10, 3)
    mat = build_dissipative(g, DissipationSchedule(1, 50))
    e0 = np.zeros(7)
    e0[0] = 1
    assert np.allclose(mat @ e0, e0)


def test_eigenvalue_first_order():
    g = CircuitGeometry(2, 20, 1)
    s = DissipationSchedule(0.5, 10**4)
    assert dissipative_eigenvalue(g, s) == pytest.approx(perturbed_eigenvalue(g, s), abs=1e-7)


def test_critical_values():
    g = CircuitGeometry(2, 100, 75)
    assert critical_a(g) == pytest.approx(0.5 * 4 * np.log(2) / 3)
    assert critical_r(g, 0) == 0.5
    assert critical_r(g, critical_a(g)) == pytest.approx(0.75)


def test_open_long_time_limits():
    g = CircuitGeometry(2, 100, 90)
    assert open_longtime_distance(g, 0, 0.7) == pytest.approx(0.3, abs=1e-10)
    assert open_longtime_distance(g, 50, 0.7) == pytest.approx(0, abs=1e-10)
    assert open_longtime_distance(CircuitGeometry(2, 100, 30), 0, 0.7) == pytest.approx(0, abs=1e-10)


def test_indicator_uniform_states():
    g = CircuitGeometry(2, 10, 10)
    assert indicator(g).entries[-1] == 1
    assert indicator(g.with_x(0)).entries[0] == 1
