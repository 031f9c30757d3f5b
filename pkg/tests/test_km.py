import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import stats

from kmjump.binning import adaptive_bins, grid_from_edges
from kmjump.errors import DomainError
from kmjump.km import (MomentTable, correct_moments, infinitesimal_moments, km_analysis,
                       km_coefficients, raw_conditional_moments, weighted_errors)
from kmjump.series import TimeSeries
from kmjump.simulate import SimConfig, simulate


def test_raw_moments_brute_force():
    x = np.random.default_rng(0).standard_normal(3000).cumsum() * 0.1
    ts = TimeSeries(x, dt=0.5)
    grid = grid_from_edges(x, np.quantile(x, np.linspace(0, 1, 6)))
    table = raw_conditional_moments(ts, grid, lags=(1, 3), min_occupancy=1)
    idx = grid.assign(x)
    for j, tau in enumerate((1, 3)):
        for b in range(grid.n_bins):
            starts = np.flatnonzero(idx[:-tau] == b)
            inc = x[starts + tau] - x[starts]
            assert table.occupancy[b, j] == starts.size
            for n in range(1, 7):
                assert table.K[n - 1, b, j] == pytest.approx(np.mean(inc ** n), rel=1e-10, abs=1e-300)


def test_min_occupancy_masks_cells():
    x = np.random.default_rng(1).standard_normal(500)
    grid = grid_from_edges(x, np.quantile(x, [0, 0.05, 1]))
    table = raw_conditional_moments(x, grid, lags=(1,), min_occupancy=50)
    assert np.all(np.isnan(table.K[:, 0, 0])) and np.all(np.isfinite(table.K[:, 1, 0]))


def test_regression_matches_linregress():
    rng = np.random.default_rng(2)
    lags, dt = (1, 2, 3, 4, 5), 0.01
    K = rng.normal(size=(6, 4, 5))
    table = MomentTable(K, np.full((4, 5), 100), lags, dt)
    reg = infinitesimal_moments(table)
    xs = np.array(lags) * dt
    for n in range(6):
        for b in range(4):
            ref = stats.linregress(xs, K[n, b] / xs)
            assert reg.M[b, n] == pytest.approx(ref.intercept, rel=1e-10)
            assert reg.beta[b, n] == pytest.approx(ref.slope, rel=1e-10)
            assert reg.r2[b, n] == pytest.approx(ref.rvalue ** 2, rel=1e-9)
            assert reg.sigma_intercept[b, n] == pytest.approx(ref.intercept_stderr, rel=1e-9)


def test_exact_linear_moments():
    lags, dt = (1, 2, 3, 4), 0.1
    xs = np.array(lags) * dt
    K = np.broadcast_to(xs * (2.0 + 3.0 * xs), (6, 2, 4)).copy()
    K[:, 1, 2:] = np.nan  # only two lags left: absent
    reg = infinitesimal_moments(MomentTable(K, np.ones((2, 4), int), lags, dt))
    np.testing.assert_allclose(reg.M[0], 2.0, rtol=1e-12)
    np.testing.assert_array_equal(reg.r2[0], 1.0)
    np.testing.assert_array_equal(reg.sigma_intercept[0], 0.0)
    assert np.all(np.isnan(reg.M[1]))


@settings(max_examples=50, deadline=None)
@given(st.lists(st.floats(-2, 2), min_size=6, max_size=6), st.floats(1e-3, 1.0))
def test_corrections_scale_with_dt(m, dt):
    # the correction polynomial is applied to per-step moments M * dt
    m = np.array(m)
    np.testing.assert_allclose(correct_moments(m, dt), correct_moments(m * dt) / dt,
                               rtol=1e-9, atol=1e-12)


def test_first_two_corrections():
    assert correct_moments([0.5, 1.25, 0, 0, 0, 0])[1] == 1.0
    np.testing.assert_array_equal(correct_moments(np.zeros(6)), 0.0)
    with pytest.raises(DomainError):
        correct_moments(np.zeros(5))


def test_pawula_boundary_and_labels():
    F = np.zeros((4, 6))
    F[0, [1, 3]] = [20.0, 24.0]        # D2 = 10, D4 = 1: ratio exactly 0.1 -> jump
    F[1, [1, 3]] = [20.0, 23.0]        # ratio below 0.1 -> diffusive
    F[2, [1, 3]] = [-1.0, 24.0]        # D2 <= 0 with positive D4 -> jump
    F[3, :] = np.nan
    c = km_coefficients(F)
    assert c.ratio[0] == 0.1
    assert list(c.classification) == ["jump", "diffusive", "jump", "absent"]
    assert not c.ratio_defined[2] and np.isnan(c.ratio[2])
    assert km_coefficients(F[2:3], jump_floor=5.0).classification[0] == "indeterminate"


def test_weighted_errors():
    np.testing.assert_allclose(weighted_errors([2.0, 1.0], [0.75, 1.0]), [1.0, 0.0])


def test_ou_drift_and_diffusion():
    ts = simulate(SimConfig(kind="OU", dt=0.01, n=200_000, seed=3))
    res = km_analysis(ts, adaptive_bins(ts))
    c = np.abs(res.centers) < 1.0
    slope, icpt = np.polyfit(res.centers[c], res.D[c, 0], 1)
    assert slope == pytest.approx(-1.0, abs=0.25)
    assert np.mean(res.D[c, 1]) == pytest.approx(0.5, rel=0.1)
    assert np.mean(res.classification[c] == "diffusive") >= 0.9


def test_jump_diffusion_pooled_ratio():
    # per bin the ratio is noisy; pooled over central bins it estimates
    # lam s^4 / (4 (b^2 + lam s^2)) = 5/24 for lam=5, s=b=1
    ts = simulate(SimConfig(kind="JumpDiffusion", lam=5.0, sigma_xi=1.0, dt=0.001,
                            n=1_000_000, seed=4))
    res = km_analysis(ts, adaptive_bins(ts))
    c = (np.abs(res.centers - ts.values.mean()) < ts.values.std()) & np.isfinite(res.D[:, 3])
    pooled = np.mean(res.D[c, 3]) / np.mean(res.D[c, 1])
    assert pooled == pytest.approx(5 / 24, rel=0.25)
    assert pooled > 0.1
