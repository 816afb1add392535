import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from covad.metrics import (
    RocCurve,
    default_nu_grid,
    detection_rates,
    roc_sweep,
    threshold_detect,
)


def test_threshold_examples():
    g = np.array([10.0, 0.0, 0.5])
    assert threshold_detect(g, 1.0, 1.0).estimated_active == {0}
    assert threshold_detect(g, 1.0, 0.0).estimated_active == {0, 2}
    assert threshold_detect(g, 1.0, 1e300).estimated_active == set()
    # equality counts as inactive
    assert threshold_detect(np.array([2.0]), 1.0, 2.0).estimated_active == set()
    with pytest.raises(ValueError):
        threshold_detect(g, 1.0, -1.0)


def test_rates_examples():
    assert detection_rates([1, 2, 3], {1, 2, 3}, 10) == (1.0, 0.0)
    p_d, p_fa = detection_rates([1, 2, 3], {1, 2, 4}, 10)
    assert p_d == pytest.approx(2 / 3) and p_fa == pytest.approx(1 / 7)
    assert detection_rates([1, 2], set(), 10) == (0.0, 0.0)
    # degenerate conventions
    assert detection_rates([], {0}, 3) == (1.0, pytest.approx(1 / 3))
    assert detection_rates([0, 1], {0}, 2) == (0.5, 0.0)
    with pytest.raises(ValueError):
        detection_rates([0], {5}, 3)


def test_roc_perfect():
    g = np.zeros(10)
    g[[2, 5]] = [4.0, 6.0]
    grid = np.array([0.5, 1.0, 3.9, 4.0, 5.0, 7.0])
    roc = roc_sweep([(g, np.array([2, 5]))], 1.0, grid)
    np.testing.assert_allclose(roc.p_fa, 0)
    np.testing.assert_allclose(roc.p_d, [1, 1, 1, 0.5, 0.5, 0])


def test_roc_zero_estimate():
    roc = roc_sweep([(np.zeros(8), np.array([1, 3]))], 1.0)
    assert not roc.p_d.any() and not roc.p_fa.any()


def test_roc_errors():
    with pytest.raises(ValueError):
        roc_sweep([], 1.0)
    with pytest.raises(ValueError):
        roc_sweep([(np.ones(3), [0])], 1.0, [1.0])
    with pytest.raises(ValueError):
        roc_sweep([(np.ones(3), [0])], 1.0, [2.0, 1.0])


def test_roc_csv():
    roc = RocCurve(np.array([0.1, 1.0]), np.array([1.0, 0.25]), np.array([0.5, 1 / 3]), 1)
    lines = roc.to_csv().splitlines()
    assert lines[0] == "nu,p_d,p_fa"
    assert len(lines) == 3
    assert float(lines[2].split(",")[2]) == 1 / 3
    assert len(lines[2].split(",")[2].replace(".", "").lstrip("0")) >= 10


def test_pd_at_pfa_interpolates():
    roc = RocCurve(np.array([1.0, 2.0, 3.0]), np.array([0.9, 0.6, 0.2]),
                   np.array([0.2, 0.1, 0.0]), 1)
    assert roc.pd_at_pfa(0.15) == pytest.approx(0.75)
    assert roc.pd_at_pfa(0.5) == 0.9
    assert roc.pd_at_pfa(0.0) == 0.2


def test_default_grid():
    g = default_nu_grid()
    assert g.size == 100 and g[0] == pytest.approx(1e-4) and g[-1] == pytest.approx(1e2)


trial = st.integers(4, 30).flatmap(lambda K: st.tuples(
    st.lists(st.floats(0, 50), min_size=K, max_size=K),
    st.sets(st.integers(0, K - 1), max_size=K)))


@settings(max_examples=50, deadline=None)
@given(trials=st.lists(trial, min_size=1, max_size=4).filter(
    lambda ts: len({len(t[0]) for t in ts}) == 1))
def test_roc_monotone(trials):
    data = [(np.array(g), np.array(sorted(s), dtype=int)) for g, s in trials]
    roc = roc_sweep(data, 1.0)
    assert np.all(np.diff(roc.p_d) <= 1e-15) and np.all(np.diff(roc.p_fa) <= 1e-15)
    assert np.all((roc.p_d >= 0) & (roc.p_d <= 1) & (roc.p_fa >= 0) & (roc.p_fa <= 1))


@settings(max_examples=50, deadline=None)
@given(t=trial, seed=st.integers(0, 2**32 - 1), nu=st.floats(0, 60))
def test_permutation_invariance(t, seed, nu):
    g, s = np.array(t[0]), sorted(t[1])
    K = g.size
    perm = np.random.default_rng(seed).permutation(K)
    inv = np.argsort(perm)
    base = detection_rates(s, threshold_detect(g, 1.0, nu), K)
    # user perm[j] becomes user j
    permuted = detection_rates(inv[s], threshold_detect(g[perm], 1.0, nu), K)
    assert permuted == base


@settings(max_examples=50, deadline=None)
@given(g=st.lists(st.one_of(st.just(0.0), st.floats(1e-200, 1e3)), min_size=1, max_size=20),
       scale=st.sampled_from([0.25, 0.5, 2.0, 4.0, 1024.0]),
       nu=st.one_of(st.just(0.0), st.floats(1e-200, 100)))
def test_scale_consistency(g, scale, nu):
    g = np.array(g)
    # power-of-two scaling keeps both sides exact away from the subnormal range
    assert threshold_detect(g, 1.3, nu) == threshold_detect(scale * g, scale * 1.3, nu)
