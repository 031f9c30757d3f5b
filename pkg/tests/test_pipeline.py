import numpy as np
import pytest

from kmjump import io as kio
from kmjump.binning import ZoneTargets
from kmjump.config import PipelineConfig
from kmjump.pipeline import PipelineError, run_pipeline
from kmjump.series import TimeSeries
from kmjump.simulate import SimConfig


def test_failure_removes_partial_bundle(tmp_path):
    # too few samples for the configured zone minima: fails at binning
    sim = SimConfig(kind="OU", dt=0.01, n=38 * 60, seed=0)
    cfg = PipelineConfig(sim=sim, window_days=5, tau_max=5, pacf_lags=5,
                         zone_targets=ZoneTargets(900, 1000, 900, 1000, 900, 1000),
                         out_dir=str(tmp_path / "out"))
    with pytest.raises(PipelineError) as exc:
        run_pipeline(cfg)
    assert exc.value.module == "binning"
    assert not (tmp_path / "out").exists()


def test_lag_warning_for_long_memory(tmp_path):
    sim = SimConfig(kind="AR1", n=38 * 500, seed=1, extras={"ar_coef": 0.95})
    cfg = PipelineConfig(sim=sim, detrend_order="none", out_dir=str(tmp_path / "o"))
    res = run_pipeline(cfg)
    assert res.markov.tau_m > 6
    assert not any("Markov time" in w for w in res.warnings)
    white = PipelineConfig(sim=SimConfig(kind="WhiteNoise", n=38 * 500, seed=1),
                           detrend_order="none", out_dir=str(tmp_path / "w"))
    assert any("Markov time" in w for w in run_pipeline(white).warnings)


def test_panel_input_writes_params(tmp_path):
    rng = np.random.default_rng(2)
    panel = tmp_path / "panel.csv"
    kio.write_rows(panel, ["t"] + [f"S{i}" for i in range(40)],
                   ([t] + list(rng.gamma(2.0, 1.0, 40)) for t in range(38 * 60)))
    res = run_pipeline(PipelineConfig(input=str(panel), window_days=5,
                                      out_dir=str(tmp_path / "o")))
    assert (tmp_path / "o" / "params.csv").exists()
    assert res.series.values.size == 38 * 60
