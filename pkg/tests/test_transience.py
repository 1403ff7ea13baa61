import math

import numpy as np
import pytest

from inhibhawkes.classification import classify, dominant_eigenvalue
from inhibhawkes.errors import NotTransientT2, RegionMismatch
from inhibhawkes.process import Params, State, Trajectory, make_rng, simulate
from inhibhawkes.transience import (
    axis_cycle_check,
    choose_eps_T2b,
    choose_r,
    escape_statistics,
    escape_step,
    growth_rate,
    ratio_theta_fraction,
    t2b_conditions,
    zero_threshold,
)

T2 = Params(1.5, -0.3, 1)
T1 = Params(-0.3, 1.2, 1)


@pytest.fixture(scope="module")
def t2_stats():
    return escape_statistics(T2, 100, 500, 1e6, seed=0)


@pytest.fixture(scope="module")
def t1_stats():
    return escape_statistics(T1, 100, 500, 1e6, seed=0)


def test_choose_r_examples():
    r = choose_r(T2)
    assert r == pytest.approx(1.13118, abs=1e-5)
    assert r * r - 1.5 * r + 0.3 == pytest.approx(-0.11721, abs=1e-5)
    assert choose_r(Params(2, 0)) == 1.5
    with pytest.raises(NotTransientT2):
        choose_r(Params(0, -1))
    with pytest.raises(NotTransientT2):
        choose_r(Params(0.6, 0.3))


def test_choose_eps_t2b():
    r = choose_r(T2)
    eps = choose_eps_T2b(T2, r)
    th = dominant_eigenvalue(T2)
    assert r * r - T2.a * (r - eps) - T2.b < 0
    assert th * th - th * eps + T2.b > 0
    assert 0 < eps < th
    assert all(t2b_conditions(T2, r, eps).values())
    # (theta-1)/2 ~ 0.131 fails the second inequality, so at least one halving happened
    assert eps < (th - 1) / 2
    with pytest.raises(RegionMismatch):
        choose_eps_T2b(Params(0.5, 0.8), 1.1)


def test_t2_sample_constants():
    rng = np.random.default_rng(0)
    done = 0
    while done < 20:
        a, b = rng.uniform(-1, 4), rng.uniform(-4, 2)
        p = Params(float(a), float(b))
        lab = classify(p)
        if not {"T2a", "T2b"} & set(lab.sublabels):
            continue
        r = choose_r(p)
        assert r * r - p.a * r - p.b < 0
        if p.b < 0:
            eps = choose_eps_T2b(p, r)
            assert all(t2b_conditions(p, r, eps).values())
        done += 1


def test_growth_rate_synthetic():
    counts = 2 ** np.arange(40, dtype=np.int64)
    assert growth_rate(counts) == pytest.approx(math.log(2), rel=1e-3)
    assert growth_rate(np.array([1] * 30 + [0] * 10 + [1] * 10)) is None
    with pytest.raises(ValueError):
        growth_rate(np.ones(10))


def test_growth_rate_recurrent():
    slopes = []
    for k in range(20):
        t = simulate(Params(0.6, 0.3), State(5, 5), 400, seed=1, index=k)
        g = growth_rate(t)
        if g is not None:
            slopes.append(g)
    assert slopes
    assert all(abs(g) < 0.02 for g in slopes)


def test_ratio_fraction_synthetic():
    th = 1.3
    seq = np.round(1e5 * th ** np.arange(30)).astype(np.int64)
    rep = ratio_theta_fraction(seq, th)
    assert rep.fraction == 1.0 and rep.count == 29
    rec = simulate(Params(0.6, 0.3), State(0, 0), 200, seed=0)
    rep = ratio_theta_fraction(rec, 1.5)
    assert rep.fraction == 1.0 and rep.vacuous
    with pytest.raises(ValueError):
        ratio_theta_fraction(seq, 0.9)


def test_t2_escape(t2_stats):
    th = dominant_eigenvalue(T2)
    assert abs(th * th - T2.a * th - T2.b) < 1e-12
    assert t2_stats.escape_fraction > 0
    esc = [r for r in t2_stats.runs if r.escaped]
    for r in esc:
        assert r.growth_rate is not None
        assert abs(r.growth_rate - math.log(th)) < 0.1 * math.log(th)
        assert r.ratio_fraction == 1.0


def test_recurrent_no_escape():
    st = escape_statistics(Params(0.6, 0.3), 100, 500, 1e6, seed=0)
    assert st.escape_fraction == 0
    assert st.mean_escape_step is None


def test_escape_statistics_validation():
    with pytest.raises(ValueError):
        escape_statistics(T2, 0)


def test_escape_statistics_deterministic():
    a = escape_statistics(T2, 5, 300, seed=7)
    b = escape_statistics(T2, 5, 300, seed=7)
    assert [r.trajectory for r in a.runs] == [r.trajectory for r in b.runs]
    assert a.escape_fraction == b.escape_fraction and a.mean_escape_step == b.mean_escape_step


def test_escape_step_definition():
    t = Trajectory(T2, State(0, 0), np.array([0, 0, 5, 999_996, 10]), seed=0)
    assert escape_step(t, 1e6) == 3
    assert escape_step(t, 1e7) is None


def test_zero_threshold():
    assert zero_threshold(T1) == 4
    assert zero_threshold(Params(-1.5, 1.2)) == 1
    assert zero_threshold(Params(-0.5, 1.2)) == 2
    with pytest.raises(RegionMismatch):
        zero_threshold(Params(0.3, 1.2))


def test_axis_cycle_t1(t1_stats):
    factors = []
    for r in t1_stats.runs:
        rep = axis_cycle_check(T1, r.trajectory)
        assert rep.deterministic_zero_ok
        assert rep.threshold == 4
        if r.escaped and len(rep.two_step_factors) > 10:
            factors.append(rep.two_step_factors[len(rep.two_step_factors) // 2:])
    late = np.concatenate(factors)
    assert abs(late.mean() - 1.2) < 0.12
    assert np.mean(late > 1) >= 0.95


def test_axis_cycle_strong_inhibition():
    p = Params(-1.5, 1.2)
    for k in range(10):
        t = simulate(p, State(0, 0), 300, seed=3, index=k)
        rep = axis_cycle_check(p, t)
        assert rep.threshold == 1
        assert rep.deterministic_zero_ok
        c = t.counts
        # every positive count is followed by a zero
        assert np.all(c[1:][c[:-1] > 0] == 0)


def test_axis_cycle_region():
    with pytest.raises(RegionMismatch):
        axis_cycle_check(T2, simulate(T2, State(0, 0), 10, seed=0))


@pytest.mark.parametrize("mu", [10, 100, 1000])
def test_chebyshev_sanity(mu):
    x = make_rng(mu).poisson(mu, size=10**5)
    for t in (2, 3):
        frac = np.mean(np.abs(x - mu) > t * math.sqrt(mu))
        assert frac <= 1 / t**2 + 0.01
