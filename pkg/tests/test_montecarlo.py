import numpy as np
import pytest

from stablema.errors import ConfigError
from stablema.estimate import EstimatorConfig
from stablema.montecarlo import (
    ExperimentConfig,
    ReplicationError,
    errors_path,
    export_report,
    import_report,
    l2_error,
    run_monte_carlo,
    run_replication,
)
from stablema.simulate import Integrator


def small_config(**kw):
    base = dict(
        integrator=Integrator("stable", 1.7),
        n=200,
        delta=0.02,
        half_width=2,
        estimator=EstimatorConfig(a_n=15.0, alpha=1.7, t_grid=np.linspace(-1, 1, 41), lambda_points=512),
        replications=4,
        base_seed=3,
    )
    base.update(kw)
    return ExperimentConfig(**base)


def test_config_validation():
    with pytest.raises(ConfigError):
        small_config(replications=0)
    with pytest.raises(ConfigError):
        small_config(envelope=(0.9, 0.1))
    with pytest.raises(ConfigError):
        small_config(envelope=(0.0, 0.5))
    with pytest.raises(ConfigError):
        small_config(kernel="gaussian2d")


def test_auto_aggregation():
    assert small_config().resolved_aggregation == "mean"
    low = small_config(
        integrator=Integrator("stable", 0.7),
        estimator=EstimatorConfig(a_n=15.0, alpha=0.7, lambda_points=512),
    )
    assert low.resolved_aggregation == "median"
    assert small_config(aggregation="median").resolved_aggregation == "median"


def test_single_replication():
    cfg = small_config(replications=1)
    rep = run_monte_carlo(cfg)
    values, err, _ = run_replication(cfg, 0)
    assert np.array_equal(rep.center, values)
    assert rep.env_lo is None and rep.env_hi is None
    assert rep.errors[0] == err


def test_determinism_and_workers():
    cfg = small_config()
    a = run_monte_carlo(cfg)
    b = run_monte_carlo(cfg)
    c = run_monte_carlo(cfg, workers=2)
    for other in (b, c):
        assert np.array_equal(a.center, other.center)
        assert np.array_equal(a.curves, other.curves)
        assert np.array_equal(a.errors, other.errors)


def test_report_invariants():
    rep = run_monte_carlo(small_config(replications=6))
    assert np.all(rep.env_lo <= rep.center + 1e-12) and np.all(rep.center <= rep.env_hi + 1e-12)
    assert np.all(np.isfinite(rep.errors)) and np.all(rep.errors >= 0)
    center_err = l2_error(rep.t_grid, rep.center, rep.f_true, (-1, 1))
    assert center_err <= rep.errors.max()
    assert 0 <= rep.coverage() <= 1


def test_l2_error_oracle():
    t = np.linspace(-1, 1, 2001)
    # int_{-1}^{1} t^2 dt = 2/3
    assert l2_error(t, t, np.zeros_like(t), (-1, 1)) == pytest.approx(np.sqrt(2 / 3), rel=1e-6)
    assert l2_error(t, t, np.zeros_like(t), (0, 1)) == pytest.approx(np.sqrt(1 / 3), rel=1e-6)
    with pytest.raises(ConfigError):
        l2_error(t, t, t, (5, 6))


def test_failure_reports_stream(monkeypatch):
    import stablema.montecarlo as mc

    def boom(*a, **k):
        raise FloatingPointError("synthetic")

    monkeypatch.setattr(mc, "simulate_ma_1d", boom)
    with pytest.raises(ReplicationError) as info:
        run_monte_carlo(small_config())
    assert info.value.stream_id == 0 and info.value.seed == 3
    assert "seed=3" in str(info.value)


def test_replication_error_pickles():
    import pickle

    err = pickle.loads(pickle.dumps(ReplicationError(5, 7, ValueError("x"))))
    assert err.stream_id == 5 and err.seed == 7


def test_export_roundtrip(tmp_path):
    rep = run_monte_carlo(small_config())
    out = export_report(rep, tmp_path / "r.csv")
    back = import_report(out)
    for name in ("t_grid", "f_true", "center", "env_lo", "env_hi", "errors"):
        assert np.array_equal(getattr(rep, name), getattr(back, name)), name
    text = out.read_text().splitlines()
    assert text[0].startswith("# stablema report version=")
    assert text[1] == "# M=4 alpha=1.7 kernel=triangular"
    assert errors_path(out).name == "r.errors.csv"
    assert back.meta["M"] == "4" and back.meta["base_seed"] == "3"


def test_export_empty_grid(tmp_path):
    from stablema.montecarlo import MonteCarloReport

    e = np.array([])
    rep = MonteCarloReport(e, e, e, None, None, np.array([0.1]), meta={"M": 1})
    out = export_report(rep, tmp_path / "empty.csv")
    lines = [l for l in out.read_text().splitlines() if not l.startswith("#")]
    assert lines == ["t,f_true,center,env_lo,env_hi"]


def test_export_io_error(tmp_path):
    rep = run_monte_carlo(small_config(replications=1))
    blocker = tmp_path / "file"
    blocker.write_text("x")
    with pytest.raises(OSError, match="file"):
        export_report(rep, blocker / "sub" / "r.csv")
