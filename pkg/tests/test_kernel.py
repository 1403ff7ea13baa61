import math

import numpy as np
import pytest
from scipy import stats

from inhibhawkes.errors import DefectTooLarge, WindowEmpty
from inhibhawkes.kernel import (
    Distribution,
    build_kernel,
    fit_log_linear,
    geometric_rate,
    index_state,
    occupation_measure,
    p2_closed_form,
    p_chain,
    pn_closed_form,
    state_index,
    stationary,
    tv_distance,
    tv_sequence,
)
from inhibhawkes.process import Params, State, intensity, simulate

P = Params(0.6, 0.3, 1)


@pytest.fixture(scope="module")
def k50():
    return build_kernel(P, 50)


@pytest.fixture(scope="module")
def pi50(k50):
    return stationary(k50, 1e-10)


def test_state_indexing_roundtrip():
    for idx in range(36):
        assert state_index(index_state(idx, 5), 5) == idx
    assert state_index(State(2, 3), 5) == 15


def test_kernel_structure(k50):
    m = k50.matrix.tocoo()
    assert np.all(m.data >= 0) and np.all(m.data <= 1)
    size = 51
    # target (k, l) must have l equal to the source's i
    assert np.all(m.col % size == m.row // size)
    rows = np.asarray(k50.matrix.sum(axis=1)).ravel()
    assert np.all(rows <= 1 + 1e-14)
    assert np.all(np.abs(rows + k50.row_defect - 1) < 1e-13)
    assert np.all(k50.row_defect >= 0)


def test_kernel_defect_bound(k50):
    assert k50.row_defect.max() <= stats.poisson.sf(50, 46) + 1e-15


def test_kernel_zero_intensity_row():
    p = Params(-1, 0, 1)
    k = build_kernel(p, 10)
    row = k.matrix.getrow(state_index(State(3, 5), 10)).toarray().ravel()
    assert row[state_index(State(0, 3), 10)] == 1.0
    assert row.sum() == 1.0
    assert k.row_defect[state_index(State(3, 5), 10)] == 0.0


def test_kernel_entries_match_pmf(k50):
    from inhibhawkes.process import transition_prob

    for src, dst in [(State(0, 0), State(0, 0)), (State(3, 7), State(5, 3)), (State(10, 2), State(12, 10))]:
        assert k50.entry(src, dst) == pytest.approx(transition_prob(P, src, dst), rel=1e-12)
    assert k50.entry(State(0, 0), State(0, 0)) == pytest.approx(math.exp(-1))


def test_defect_monotone_in_N():
    maxima = [build_kernel(P, n).row_defect for n in (25, 50, 100)]
    # compare on the common box
    for small, big, ns, nb in [(maxima[0], maxima[1], 25, 50), (maxima[1], maxima[2], 50, 100)]:
        for i in range(0, ns + 1, 5):
            for j in range(0, ns + 1, 5):
                s = State(i, j)
                assert big[state_index(s, nb)] <= small[state_index(s, ns)] + 1e-16


def test_p2_examples():
    assert p2_closed_form(P, State(0, 0), State(0, 0)) == pytest.approx(math.exp(-2))
    src, dst = State(3, 1), State(4, 2)
    mid = State(2, 3)
    from inhibhawkes.process import transition_prob

    assert p2_closed_form(P, src, dst) == pytest.approx(
        transition_prob(P, src, mid) * transition_prob(P, mid, dst), rel=1e-12
    )


def test_p2_vs_matrix_square(k50):
    m2 = (k50.matrix @ k50.matrix).tocsr()
    rng = np.random.default_rng(5)
    for _ in range(20):
        src = State(*(int(x) for x in rng.integers(0, 20, 2)))
        dst = State(int(rng.integers(0, 20)), int(rng.integers(0, 20)))
        exact = p2_closed_form(P, src, dst)
        approx = m2[state_index(src, 50), state_index(dst, 50)]
        bound = k50.row_defect[state_index(src, 50)] + k50.row_defect.max()
        assert abs(exact - approx) <= bound + 1e-15
        assert abs(exact - approx) < 1e-10


@pytest.mark.parametrize("n", [3, 4])
def test_pn_vs_matrix_power(k50, n):
    mp = k50.matrix
    for _ in range(n - 1):
        mp = mp @ k50.matrix
    mp = mp.tocsr()
    rng = np.random.default_rng(n)
    for _ in range(10):
        src = State(*(int(x) for x in rng.integers(0, 10, 2)))
        dst = State(int(rng.integers(0, 15)), int(rng.integers(0, 15)))
        lb = pn_closed_form(P, src, dst, n, cap=50)
        mat = mp[state_index(src, 50), state_index(dst, 50)]
        assert lb <= mat + n * k50.row_defect.max() + 1e-15
        assert abs(lb - mat) < 1e-10


def test_pn_cap_zero_single_path():
    src, dst = State(2, 1), State(3, 0)
    # n = 3: counts (1, 2, m1=0, 0, 3)
    path = [src, State(0, 2), State(0, 0), State(3, 0)]
    assert pn_closed_form(P, src, dst, 3, 0) == pytest.approx(p_chain(P, path), rel=1e-12)
    path4 = [src, State(0, 2), State(0, 0), State(0, 0), State(3, 0)]
    assert pn_closed_form(P, src, dst, 4, 0) == pytest.approx(p_chain(P, path4), rel=1e-12)


def test_pn_monotone_in_cap():
    src, dst = State(1, 1), State(2, 3)
    vals = [pn_closed_form(P, src, dst, 5, c) for c in (0, 2, 5, 10, 30)]
    assert all(x <= y + 1e-18 for x, y in zip(vals, vals[1:]))


def test_pn_rejects_bad_args():
    with pytest.raises(ValueError):
        pn_closed_form(P, State(0, 0), State(0, 0), 2, 5)
    with pytest.raises(ValueError):
        pn_closed_form(P, State(0, 0), State(0, 0), 3, -1)


def test_stationary(k50, pi50):
    assert pi50.residual < 1e-8
    assert pi50.pi.weight(State(0, 0)) > 0
    assert abs(pi50.pi.mass - 1) < 1e-12
    assert np.all(pi50.pi.weights >= 0)
    assert pi50.leak < 1e-3


def test_stationary_transient_defect():
    with pytest.raises(DefectTooLarge):
        stationary(build_kernel(Params(1.5, -0.3), 50))


def test_tv_distance_properties():
    a = Distribution.point_mass(State(0, 0), 5)
    b = Distribution.point_mass(State(1, 2), 5)
    assert tv_distance(a, a) == 0
    assert tv_distance(a, b) == 1
    rng = np.random.default_rng(0)
    x = Distribution(5, rng.random(36))
    y = Distribution(5, rng.random(36) * 0.5)
    assert tv_distance(x, y) == tv_distance(y, x)
    assert 0 <= tv_distance(x, y) <= 1
    with pytest.raises(ValueError):
        tv_distance(a, Distribution.point_mass(State(0, 0), 6))


def test_geometric_rate(k50, pi50):
    fits = [geometric_rate(k50, s, pi50.pi, 60) for s in (State(0, 0), State(5, 5), State(20, 0))]
    for f in fits:
        assert f.beta_hat > 1 and f.r_squared > 0.99
    b = [f.beta_hat for f in fits]
    assert max(b) / min(b) < 1.05


def test_rate_from_pi_is_flat(k50, pi50):
    v = pi50.pi.weights.copy()
    target = pi50.pi.normalized()
    for _ in range(20):
        v = k50.apply(v)
        assert 0.5 * np.abs(v / v.sum() - target).sum() < 1e-8


def test_fit_log_linear():
    d = 0.4 * 0.5 ** np.arange(30)
    f = fit_log_linear(d)
    assert f.beta_hat == pytest.approx(2.0)
    assert f.r_squared == pytest.approx(1.0)
    with pytest.raises(WindowEmpty):
        fit_log_linear(np.array([0.9, 0.8, 1e-13]))


def test_tv_sequence_starts_far(k50, pi50):
    d = tv_sequence(k50, State(0, 0), pi50.pi, 5)
    assert len(d) == 6 and d[0] > 0.9


def test_occupation_measure(pi50):
    t = simulate(P, State(0, 0), 10**6, seed=0)
    occ, outside = occupation_measure(t, 50, burn_in=1000)
    assert outside < 1e-3
    assert tv_distance(occ, pi50.pi) < 0.02


def test_p_chain():
    path = [State(0, 0), State(2, 0), State(1, 2)]
    assert p_chain(P, path) == pytest.approx(
        stats.poisson.pmf(2, 1) * stats.poisson.pmf(1, intensity(P, State(2, 0)))
    )
    assert p_chain(P, [State(0, 0), State(1, 1)]) == 0.0
