"""Acceptance suite: one PASS/FAIL line per criterion.

Each test prints ``ACCEPTANCE <n> PASS|FAIL: <detail>`` (with capture
disabled, so the line shows up in ``pytest -v`` output) and then asserts.
"""

import json
import math
import random
import time
from fractions import Fraction

import numpy as np
import pytest

from brickmemory.cli import FIGURES, main, parse_float_range, parse_int_range
from brickmemory.distance import (
    annealed_distance_sq,
    contractions,
    distance_series,
    infinite_time_limit,
    infinite_time_pure,
    short_time_pair_product,
    short_time_w,
)
from brickmemory.markov import (
    DissipationSchedule,
    build_a0,
    contract,
    critical_a,
    critical_r,
    dissipative_eigenvalue,
    indicator,
    open_longtime_distance,
)
from brickmemory.profiles import pair_product_profile, w_state_profile
from brickmemory.validation import CircuitGeometry
from brickmemory.walkcoeff import (
    a_coeff,
    a_infinity,
    a_infinity_series,
    all_to_all,
    b_coeff,
    b_infinity,
    c_coeff,
    c_coeff_oracle,
    k_bounds,
    q_n,
)


@pytest.fixture
def report(capsys):
    def emit(n, ok, detail):
        with capsys.disabled():
            print(f"\nACCEPTANCE {n} {'PASS' if ok else 'FAIL'}: {detail}")
        assert ok, detail

    return emit


def odd_cuts(two_l):
    return range(1, two_l, 2)


def test_acceptance_01_walk_oracle_equivalence(report):
    start = time.perf_counter()
    bad = []
    cases = 0
    for two_l in range(4, 17, 2):
        for x in odd_cuts(two_l):
            g = CircuitGeometry(2, two_l, x)
            for m in range(61):
                oracle = c_coeff_oracle(g, m)
                k_min, k_max = k_bounds(g, m)
                closed = {g.x - m + 2 * k: c_coeff(g, k, m) for k in range(k_min, k_max + 1)}
                closed = {y: v for y, v in closed.items() if v}
                if closed != oracle.surviving:
                    bad.append(("C", two_l, x, m))
                if a_coeff(g, m) != oracle.absorbed_weight(g.alpha, "left"):
                    bad.append(("A", two_l, x, m))
                if b_coeff(g, m) != oracle.absorbed_weight(g.alpha, "right"):
                    bad.append(("B", two_l, x, m))
                cases += 1
    elapsed = time.perf_counter() - start
    ok = not bad and elapsed < 60
    report(1, ok, f"{cases} (2L, x, m) cases, mismatches={bad[:3]}, {elapsed:.1f}s (< 60s)")


def test_acceptance_02_infinite_time_triple_agreement(report):
    worst = Fraction(0)
    bad = []
    for q in (2, 3, 5):
        for two_l in range(4, 25, 2):
            bound = Fraction(1, q ** (2 * two_l))  # 10^-(4L log10 q)
            for x in range(1, two_l):
                g = CircuitGeometry(q, two_l, x)
                if (a_infinity(g), b_infinity(g)) != all_to_all(g):
                    bad.append(("all-to-all", q, two_l, x))
                partial, tail = a_infinity_series(g)
                err = abs(a_infinity(g) - partial)
                if err > tail or err > bound:
                    bad.append(("series", q, two_l, x))
                worst = max(worst, err / bound)
    report(2, not bad, f"mismatches={bad[:3]}, worst series error / q^-4L = {float(worst):.2e}")


def test_acceptance_03_identical_states_zero(report):
    nonzero = []
    count = 0
    for two_l in (4, 8, 16, 24, 40):
        for x in odd_cuts(two_l):
            g = CircuitGeometry(2, two_l, x)
            for prof in (pair_product_profile(1), w_state_profile(two_l=two_l, omega=1)):
                for t in range(201):
                    count += 1
                    if annealed_distance_sq(g, t, prof, exact=True) != 0:
                        nonzero.append((two_l, x, t, type(prof).__name__))
    report(3, not nonzero, f"{count} exact evaluations, nonzero={nonzero[:3]}")


def test_acceptance_04_bounds(report):
    rng = random.Random(20240607)
    bad = []
    for _ in range(10_000):
        q = rng.randint(2, 5)
        two_l = 2 * rng.randint(2, 15)
        x = 2 * rng.randrange(two_l // 2) + 1
        t = rng.randint(0, 40)
        val = Fraction(rng.randint(0, 1000), 1000)
        if rng.random() < 0.5:
            prof = pair_product_profile(val)
        else:
            prof = w_state_profile(two_l=two_l, omega=val)
        d = annealed_distance_sq(CircuitGeometry(q, two_l, x), t, prof, exact=True)
        if not 0 <= d <= 1:
            bad.append((q, two_l, x, t, prof))
    report(4, not bad, f"10000 random tuples, out of [0, 1]: {len(bad)}")


def test_acceptance_05_short_time_window(report):
    bad = []
    count = 0
    beta = omega = Fraction(7, 10)
    for two_l in range(4, 101, 2):
        p = pair_product_profile(beta)
        w = w_state_profile(two_l=two_l, omega=omega)
        for x in odd_cuts(two_l):
            g = CircuitGeometry(2, two_l, x)
            t = 0
            while 2 * t < min(x, two_l - x):
                count += 1
                if short_time_pair_product(g, t, beta, exact=True) != annealed_distance_sq(
                    g, t, p, exact=True
                ):
                    bad.append(("pair", two_l, x, t))
                if short_time_w(g, t, omega, exact=True) != annealed_distance_sq(
                    g, t, w, exact=True
                ):
                    bad.append(("w", two_l, x, t))
                t += 1
    report(5, not bad, f"{count} (2L, x, t) cells, rational mismatches={bad[:3]}")


def test_acceptance_06_long_time_convergence(report):
    worst = 0.0
    for prof in (pair_product_profile(0.7), w_state_profile(two_l=40, omega=0.7)):
        for x in odd_cuts(40):
            g = CircuitGeometry(2, 40, x)
            d = annealed_distance_sq(g, 20 * 40, prof)
            worst = max(worst, abs(d - infinite_time_pure(g, prof.overlap_sq(40))))
    classifier = []
    for prof in (pair_product_profile(0.7), w_state_profile(two_l=200, omega=0.7)):
        one_minus = 1 - float(prof.overlap_sq(200))
        lo = annealed_distance_sq(CircuitGeometry(2, 200, 61), 4000, prof)
        hi = annealed_distance_sq(CircuitGeometry(2, 200, 159), 4000, prof)
        classifier.append(
            lo < 1e-6
            and abs(hi - one_minus) < 1e-6
            and infinite_time_limit(0.3, prof.overlap_sq(200)) == 0
            and abs(infinite_time_limit(0.8, prof.overlap_sq(200)) - one_minus) < 1e-12
        )
    ok = worst < 1e-8 and all(classifier)
    report(6, ok, f"2L=40 max |engine - leading form| = {worst:.2e} (< 1e-8); "
                  f"2L=200 classifier (pair, W) = {classifier}")


def _sweep_preset(number):
    _, preset = FIGURES[number]
    two_l = int(preset["two_l"])
    xs = parse_int_range(preset["x"], "x")
    times = parse_int_range(preset["t"], "t")
    prof_spec = preset["profile"]
    if prof_spec.startswith("pair"):
        prof = pair_product_profile(Fraction(prof_spec.split("=")[1]))
    else:
        prof = w_state_profile(two_l=two_l, omega=Fraction(prof_spec.split("=")[1]))
    curves = {x: distance_series(CircuitGeometry(2, two_l, x), times, prof).values for x in xs}
    return two_l, times, curves


def _crossing(xs, ys, level):
    for (x0, y0), (x1, y1) in zip(zip(xs, ys), zip(xs[1:], ys[1:])):
        if (y0 - level) * (y1 - level) <= 0 and y0 != y1:
            return x0 + (level - y0) * (x1 - x0) / (y1 - y0)
    return math.nan


def test_acceptance_07_figure_reproduction(report):
    start = time.perf_counter()
    checks = {}
    two_l, times, fig2 = _sweep_preset("2")
    for x in (11, 51, 91):
        v = fig2[x]
        monotone = all(b <= a + 1e-15 for a, b in zip(v, v[1:]))
        checks[f"fig2 x={x} monotone decay to <1e-6 (final {v[-1]:.2e})"] = monotone and v[-1] < 1e-6
    for x in (111, 151, 191):
        checks[f"fig2 x={x} saturates near 1"] = abs(fig2[x][-1] - 1) < 1e-6
    gap = max(abs(a - b) for a, b in zip(fig2[151], fig2[191]))
    checks[f"fig2 x=151 vs 191 max gap {gap:.1e} < 1e-3"] = gap < 1e-3
    _, _, fig3 = _sweep_preset("3")
    for x in (111, 151, 191):
        checks[f"fig3 x={x} saturates at 0.3"] = abs(fig3[x][-1] - 0.3) < 1e-6
    _, preset = FIGURES["1"]
    n1 = int(preset["two_l"])
    xs = parse_int_range(preset["x"], "x")
    for spec in preset["profile"].split(";"):
        omega = Fraction(spec.split("=")[1])
        ys = [infinite_time_pure(CircuitGeometry(2, n1, x), omega) / float(1 - omega) for x in xs]
        x10, x50, x90 = (_crossing(xs, ys, lv) for lv in (0.1, 0.5, 0.9))
        checks[f"fig1 omega={omega} centre {x50:.2f}, 10-90 width {x90 - x10:.2f}"] = (
            abs(x50 - n1 // 2) <= 1 and x90 - x10 <= 10
        )
    failed = [k for k, v in checks.items() if not v]
    elapsed = time.perf_counter() - start
    report(7, not failed, f"{len(checks) - len(failed)}/{len(checks)} checks hold "
                          f"({elapsed:.0f}s); failing: {failed}")


def test_acceptance_08_markov_walk_cross_check(report):
    worst = 0.0
    for two_l in (4, 10, 20, 40):
        profs = (pair_product_profile(0.7), w_state_profile(two_l=two_l, omega=0.7))
        for x in odd_cuts(two_l):
            g = CircuitGeometry(2, two_l, x)
            a0 = build_a0(g)
            w = indicator(g)
            for t in range(101):
                if t:
                    w = type(w)(g, a0 @ w.entries)
                exact = contractions(g, 2 * t, profs)
                for p, e in zip(profs, exact):
                    worst = max(worst, abs(contract(w, p) - float(e)))
    report(8, worst < 1e-12, f"max |Markov - walk| over 2L<=40, t<=100: {worst:.2e}")


def test_acceptance_09_perturbation_theory(report):
    q = 2
    rows = []
    ok = True
    for two_l in (20, 100):
        g = CircuitGeometry(q, two_l, 1)
        ell = two_l // 2
        for a in (0.2, 0.5, 1.0):
            scaled = []
            for T in (10**3, 10**4, 10**5):
                lam = dissipative_eigenvalue(g, DissipationSchedule(a, T))
                pred = 1 - a * (ell / T) * (1 - q**-2) / (1 - q ** (-2 * ell))
                scaled.append(abs(lam - pred) * T)
            ratios = [scaled[i] / scaled[i + 1] for i in range(2)]
            ok &= all(r >= 3 for r in ratios)
            rows.append(f"2L={two_l},a={a}:{ratios[0]:.1f}x/{ratios[1]:.1f}x")
    anchor = q_n(CircuitGeometry(2, 4, 1), 2)
    ok &= anchor == Fraction(21, 4)
    report(9, ok, f"residual*T drop per decade {rows}; Q_2 = {anchor}")


def test_acceptance_10_open_system_transition(report):
    _, preset = FIGURES["4"]
    two_l = int(preset["two_l"])
    omega = Fraction(preset["profile"].split("=")[1])
    a_grid = parse_float_range(preset["a"], "a")
    results = []
    ok = True
    for x in parse_int_range(preset["x"], "x"):
        g = CircuitGeometry(2, two_l, x)
        curve = [open_longtime_distance(g, a, omega) for a in a_grid]
        half = 0.5 * curve[0]
        lo, hi = 0.0, 50.0
        for _ in range(200):
            mid = 0.5 * (lo + hi)
            if open_longtime_distance(g, mid, omega) > half:
                lo = mid
            else:
                hi = mid
        a_c = critical_a(g)
        within = abs(lo - a_c) <= 0.1 * a_c
        ok &= within
        results.append(f"r={x / two_l}: crossing {lo:.3f} vs a_c {a_c:.3f}")
    ok &= critical_r(CircuitGeometry(2, two_l, 1), 0) == 0.5
    report(10, ok, "; ".join(results) + "; critical_r(a=0) = 1/2")


def test_acceptance_11_monte_carlo(report, tmp_path):
    start = time.perf_counter()
    out = tmp_path / "mc.json"
    code = main(["mc-validate", "--seed", "7", "--n", "20000", "--format", "json",
                 "--out", str(out)])
    summary = json.loads(out.read_text())["summary"]
    elapsed = time.perf_counter() - start
    ok = (
        code == 0
        and summary["fraction_within_3se"] >= 0.95
        and summary["folded_mixed_residual"] < summary["folded_bound"]
        and summary["haar_second_moment_z"] <= 3
        and elapsed <= 15 * 60
    )
    report(11, ok,
           f"{summary['fraction_within_3se'] * 100:.1f}% of {summary['cells']} cells within 3 se; "
           f"folded residual {summary['folded_mixed_residual']:.2e} < {summary['folded_bound']:.2e}; "
           f"max |z| of E|U_ij|^2 - 1/d = {summary['haar_second_moment_z']:.2f}; {elapsed:.0f}s")
