import numpy as np
import pytest

from kmjump.errors import DomainError
from kmjump.simulate import SimConfig, jump_log, normalize_kind, simulate


def test_seed_determinism():
    cfg = SimConfig(kind="JumpDiffusion", lam=3.0, sigma_xi=0.5, dt=0.01, n=5000, seed=4)
    np.testing.assert_array_equal(simulate(cfg).values, simulate(cfg).values)
    other = SimConfig(kind="JumpDiffusion", lam=3.0, sigma_xi=0.5, dt=0.01, n=5000, seed=5)
    assert not np.array_equal(simulate(cfg).values, simulate(other).values)


def test_jumps_add_on_top_of_shared_diffusion():
    cfg = SimConfig(kind="JumpDiffusion", drift_theta=0.0, lam=5.0, sigma_xi=1.0,
                    dt=0.01, n=3000, seed=1)
    with_j = simulate(cfg).values
    without = simulate(cfg, include_jumps=False).values
    total = sum(size for _, size in jump_log(cfg))
    # with zero drift the jumps accumulate additively
    assert with_j[-1] - without[-1] == pytest.approx(total, abs=1e-9)


def test_ou_stationary_variance():
    ts = simulate(SimConfig(kind="OU", drift_theta=1.0, b=1.0, dt=0.01, n=400_000, seed=0))
    assert ts.values.var() == pytest.approx(0.5, rel=0.05)


def test_jump_diffusion_variance_and_rate():
    cfg = SimConfig(kind="JumpDiffusion", drift_theta=1.0, b=1.0, lam=5.0, sigma_xi=1.0,
                    dt=0.001, n=500_000, seed=2)
    log = jump_log(cfg)
    expected = 5.0 * 0.001 * (cfg.n - 1)
    assert abs(len(log) - expected) < 5 * np.sqrt(expected)
    # stationary variance (b^2 + lam sigma^2) / (2 theta) = 3
    assert simulate(cfg).values.var() == pytest.approx(3.0, rel=0.15)


def test_ar1_and_random_walk():
    ar = simulate(SimConfig(kind="AR1", n=50_000, seed=0, extras={"ar_coef": 0.7}))
    x = ar.values - ar.values.mean()
    assert (x[1:] @ x[:-1]) / (x @ x) == pytest.approx(0.7, abs=0.02)
    rw = simulate(SimConfig(kind="RandomWalk", n=1000, seed=0, dt=1.0, x0=2.0))
    assert rw.values[0] == 2.0 and rw.values.size == 1000


def test_profile_plus_noise_period():
    cfg = SimConfig(kind="ProfilePlusNoise", b=0.0, n=38 * 10, seed=0,
                    extras={"profile": (1.0, 0.5, 0.0, -0.01), "points_per_day": 38})
    x = simulate(cfg).values.reshape(10, 38)
    np.testing.assert_allclose(x, np.tile(x[0], (10, 1)), atol=1e-12)


def test_validation():
    with pytest.raises(DomainError):
        SimConfig(kind="JumpDiffusion", lam=200.0, dt=0.001)
    with pytest.raises(DomainError):
        normalize_kind("Levy")
    assert normalize_kind("ou") == "OU"
