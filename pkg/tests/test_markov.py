import numpy as np
import pytest
from scipy import stats
from statsmodels.tsa.stattools import acf as sm_acf, pacf as sm_pacf

from kmjump.errors import InsufficientDataError
from kmjump.simulate import SimConfig, simulate
from kmjump.markov import (acf, conditional_entropy, conditional_entropy_from_counts,
                           entropy_curve, markov_report, markov_time_pacf, pacf_yule_walker)


def test_entropy_from_counts_against_scipy():
    joint = np.array([[10, 0, 5], [3, 3, 3], [0, 1, 20]], dtype=float)
    p = joint / joint.sum()
    ref = stats.entropy(p.ravel()) - stats.entropy(p.sum(axis=1))
    assert conditional_entropy_from_counts(joint) == pytest.approx(ref, rel=1e-12)


def test_entropy_limits():
    x = np.random.default_rng(0).standard_normal(20_000)
    # lag 0 equivalent: y determined by x
    assert conditional_entropy_from_counts(np.eye(4) * 7) == 0.0
    assert conditional_entropy(np.ones(1000), 1) == 0.0
    # independent pairs: H(Y|X) approaches H(Y) from below
    codes = np.minimum(((x - x.min()) / np.ptp(x) * 30).astype(int), 29)
    hy = stats.entropy(np.bincount(codes, minlength=30))
    assert conditional_entropy(x, 1) == pytest.approx(hy, abs=0.05)


def test_entropy_curve_is_nondecreasing_for_ar1():
    rng = np.random.default_rng(1)
    e = rng.standard_normal(30_000)
    x = np.empty_like(e)
    x[0] = e[0]
    for t in range(1, x.size):
        x[t] = 0.8 * x[t - 1] + e[t]
    h = entropy_curve(x, 10)
    assert h.size == 11 and np.all(np.diff(h) > -0.01)
    np.testing.assert_array_equal(h, entropy_curve(x, 10, workers=3))


def test_entropy_needs_pairs():
    with pytest.raises(InsufficientDataError):
        conditional_entropy(np.random.default_rng(0).standard_normal(50), 1)


def test_pacf_and_acf_match_statsmodels():
    x = np.random.default_rng(2).standard_normal(3000).cumsum()[::7]
    np.testing.assert_allclose(pacf_yule_walker(x, 15), sm_pacf(x, 15, method="ldb")[1:], atol=1e-12)
    np.testing.assert_allclose(acf(x, 15), sm_acf(x, nlags=15, fft=False)[1:], atol=1e-12)


def test_pacf_cutoff_for_ar2():
    rng = np.random.default_rng(3)
    e = rng.standard_normal(50_000)
    x = np.zeros_like(e)
    for t in range(2, x.size):
        x[t] = 0.5 * x[t - 1] + 0.3 * x[t - 2] + e[t]
    assert markov_time_pacf(x) == 3


def test_report_fields():
    x = np.random.default_rng(4).standard_normal(5000)
    rep = markov_report(x)
    assert rep.tau_m_entropy == 1 and rep.tau_m_pacf == 1 and rep.tau_m == 1
    assert len(rep.entropy_curve) == 21 and rep.pacf_bound == pytest.approx(1.96 / np.sqrt(5000))


def test_ar1_pacf_markov_time():
    hits = sum(markov_time_pacf(simulate(SimConfig(kind="AR1", n=17_000, seed=s,
                                                   extras={"ar_coef": 0.6}))) == 2
               for s in range(50))
    assert hits >= 40
