import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from procclust.dissimilarity import pairwise_distances, psd_distance
from procclust.genmodel import ar2_model
from procclust.spectra import PsdEstimate

METRICS = ["L1", "L2", "Linf"]


def _ar2_on_grid(a, nu, F):
    f = np.arange(F) / F
    z = np.exp(2j * np.pi * f)
    return 1.0 / np.abs(1 - 2 * a * np.cos(nu) * z + a**2 * z**2) ** 2


@pytest.mark.parametrize("metric", METRICS)
def test_identity(metric):
    s = PsdEstimate(np.random.default_rng(0).random(32))
    assert psd_distance(s, s, metric) == 0


def test_disjoint_unit_power_l1_is_one():
    a = np.zeros(64)
    b = np.zeros(64)
    a[:32] = 2.0
    b[32:] = 2.0
    assert psd_distance(a, b) == pytest.approx(1.0)


def test_metric_formulas():
    a = np.array([1.0, 2.0, 3.0, 4.0])
    b = np.array([1.0, 1.0, 5.0, 4.0])
    assert psd_distance(a, b, "L1") == pytest.approx(0.5 * 3 / 4)
    assert psd_distance(a, b, "L2") == pytest.approx(np.sqrt(5 / 4))
    assert psd_distance(a, b, "Linf") == 2.0


def test_grid_mismatch():
    with pytest.raises(ValueError):
        psd_distance(np.ones(4), np.ones(8))
    with pytest.raises(ValueError):
        psd_distance(np.ones(4), np.ones(4), "L3")


def test_ar2_quadrature_refinement():
    # F = 4096 Riemann sum vs F = 2^18 reference, both from closed-form PSDs
    vals = {}
    for F in (4096, 2**18):
        s1, s2 = _ar2_on_grid(0.6, 0.7 * np.pi, F), _ar2_on_grid(0.6, 0.62 * np.pi, F)
        vals[F] = psd_distance(s1 / s1.mean(), s2 / s2.mean())
    assert vals[4096] == pytest.approx(vals[2**18], abs=1e-3)


def test_pairwise_identical_pair():
    s = np.ones(16)
    np.testing.assert_array_equal(pairwise_distances([s, s]), np.zeros((2, 2)))


@pytest.mark.parametrize("metric", METRICS)
def test_pairwise_matches_scalar_calls(metric):
    rng = np.random.default_rng(1)
    psds = [PsdEstimate(rng.random(128)) for _ in range(3)]
    D = pairwise_distances(psds, metric)
    for i in range(3):
        for j in range(3):
            assert D[i, j] == psd_distance(psds[i], psds[j], metric)


def test_pairwise_symmetric_n10():
    rng = np.random.default_rng(2)
    P = rng.random((10, 256))
    D = pairwise_distances(P)
    Dt = pairwise_distances(P[::-1])[::-1, ::-1]
    np.testing.assert_array_equal(D, D.T)
    np.testing.assert_allclose(D, Dt, atol=1e-15)
    assert np.all(np.diag(D) == 0) and np.all(D >= 0)


psd_vec = st.lists(st.floats(0, 10), min_size=16, max_size=16).map(np.array)


@settings(max_examples=60, deadline=None)
@given(psd_vec, psd_vec, psd_vec, st.sampled_from(METRICS))
def test_triangle_inequality(a, b, c, metric):
    assert psd_distance(a, c, metric) <= psd_distance(a, b, metric) + psd_distance(b, c, metric) + 1e-9


@settings(max_examples=60, deadline=None)
@given(psd_vec.filter(lambda v: v.sum() > 0), psd_vec.filter(lambda v: v.sum() > 0))
def test_l1_unit_power_in_unit_interval(a, b):
    d = psd_distance(a / a.mean(), b / b.mean())
    assert -1e-12 <= d <= 1 + 1e-12


@settings(max_examples=60, deadline=None)
@given(psd_vec, psd_vec, st.floats(0.01, 100), st.sampled_from(METRICS))
def test_homogeneity(a, b, c, metric):
    assert psd_distance(c * a, c * b, metric) == pytest.approx(c * psd_distance(a, b, metric), rel=1e-9, abs=1e-12)


def test_model_psds_at_expected_distance():
    m1, m2 = ar2_model(0.6, 0.7 * np.pi), ar2_model(0.6, 0.62 * np.pi)
    assert psd_distance(m1.psd, m2.psd) == pytest.approx(0.2, abs=0.01)
