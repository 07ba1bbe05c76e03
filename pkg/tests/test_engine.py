import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from indoor_mimo import engine
from indoor_mimo.engine import (drop_stream, empirical_cdf, percentile,
                                run_campaign, run_drop)
from indoor_mimo.precoding import SingularChannelError
from indoor_mimo.scenario import ScenarioConfig, scenario_configs

NO_I = (float("-inf"),)


def small(density="sparse", **kw):
    kw.setdefault("n_drops", 4)
    kw.setdefault("nulls_sweep", ())
    kw.setdefault("outdoor_interference_dbm", NO_I)
    return ScenarioConfig.preset(density, **kw)


def test_run_drop_deterministic():
    cfg = small()
    a = run_drop(cfg, "edazf", drop_stream(3, 0))
    b = run_drop(cfg, "edazf", drop_stream(3, 0))
    assert a == b


def test_run_drop_sparse_records():
    recs = run_drop(small(), "zf", drop_stream(0, 1))
    assert len(recs) == 80
    assert [r.ue_id for r in recs] == list(range(80))
    assert {r.assoc_bs for r in recs} <= {0, 1}
    for r in recs:
        assert math.isfinite(r.sinr_db)
        assert r.throughput_mbps == pytest.approx(r.rate_mbps * r.time_fraction)


def test_run_drop_nemimo_no_intercell():
    recs = run_drop(small("intermediate"), "nemimo", drop_stream(0, 2))
    assert all(r.intercell_w == 0.0 for r in recs)
    assert all(r.signal_w > 0 for r in recs)


def test_run_drop_schemes_share_topology():
    cfg = small("intermediate")
    zf = run_drop(cfg, "zf", drop_stream(5, 0))
    ne = run_drop(cfg, "nemimo", drop_stream(5, 0))
    assert [r.assoc_bs for r in zf] == [r.assoc_bs for r in ne]
    assert [r.time_fraction for r in zf] == [r.time_fraction for r in ne]


def test_run_drop_unknown_scheme():
    with pytest.raises(ValueError):
        run_drop(small(), "mrt", drop_stream(0, 0))


@pytest.mark.filterwarnings("ignore:.*5%-worst rate exceeds:RuntimeWarning")
def test_single_drop_campaign_equals_run_drop():
    cfg = small(n_drops=1, seed=17)
    summary = run_campaign(cfg)
    for scheme in ("zf", "nemimo", "edazf"):
        recs = run_drop(cfg, scheme, drop_stream(17, 0))
        cell = summary.cell("sparse", scheme)
        np.testing.assert_array_equal(cell.throughput_mbps,
                                      [r.throughput_mbps for r in recs])
        np.testing.assert_array_equal(cell.sinr_db, [r.sinr_db for r in recs])
        assert cell.mean_mbps == np.mean([r.throughput_mbps for r in recs])


def test_record_count_per_cell():
    cfg = small("intermediate", n_drops=3, nulls_sweep=(0, 2),
                outdoor_interference_dbm=(float("-inf"), -80.0))
    summary = run_campaign(cfg)
    # 2 levels x (zf + nemimo + 3 null counts)
    assert len(summary.cells) == 10
    for cell in summary.cells.values():
        assert cell.throughput_mbps.size == 3 * 80
        assert cell.sinr_db.size == 3 * 80


@pytest.mark.filterwarnings("ignore:.*5%-worst rate exceeds:RuntimeWarning")
def test_cartesian_sweep_nine_cells():
    summary = run_campaign(scenario_configs(n_drops=1, nulls_sweep=(),
                                            outdoor_interference_dbm=NO_I))
    assert len(summary.cells) == 9
    assert {(k.scenario, k.scheme) for k in summary.cells} == {
        (d, s) for d in ("sparse", "intermediate", "dense")
        for s in ("zf", "nemimo", "edazf")}
    assert summary.ok


def test_edazf_without_nulls_matches_zf_statistics():
    cfg = small("intermediate", n_drops=5, nulls_sweep=(0,))
    summary = run_campaign(cfg, schemes=("zf", "edazf"))
    zf, ed = summary.cell("intermediate", "zf"), summary.cell(
        "intermediate", "edazf", n_nulls=0)
    np.testing.assert_array_equal(zf.throughput_mbps, ed.throughput_mbps)
    np.testing.assert_array_equal(zf.sinr_db, ed.sinr_db)
    assert zf.p5_mbps == ed.p5_mbps


def test_doubling_drops_converges():
    short = run_campaign(small(n_drops=30, seed=2), schemes=("zf",))
    long = run_campaign(small(n_drops=60, seed=2), schemes=("zf",))
    a = short.cell("sparse", "zf").throughput_mbps
    b = long.cell("sparse", "zf").throughput_mbps
    # the first 30 drops are shared, so the two estimates are nested
    np.testing.assert_array_equal(a, b[:a.size])
    per_drop = b.reshape(60, 80).mean(axis=1)
    sigma = per_drop.std(ddof=1) * math.sqrt(2 / 30) / 2
    assert abs(b.mean() - a.mean()) <= 3 * sigma


def test_outdoor_interference_lowers_mean():
    cfg = small(n_drops=3, outdoor_interference_dbm=(float("-inf"), -80.0, -60.0))
    summary = run_campaign(cfg, schemes=("nemimo",))
    means = [summary.cell("sparse", "nemimo", i).mean_mbps
             for i in summary.interference_levels]
    # levels sort ascending, so rates must not increase along the list
    assert np.all(np.diff(means) <= 0)


def test_campaign_independent_of_workers():
    cfg = small("dense", n_drops=4)
    a = run_campaign(cfg, workers=1)
    b = run_campaign(cfg, workers=2)
    assert a.cells.keys() == b.cells.keys()
    for key in a.cells:
        np.testing.assert_array_equal(a.cells[key].throughput_mbps,
                                      b.cells[key].throughput_mbps)


def test_p5_above_mean_warns():
    cell = engine.Cell(engine.CellKey("sparse", "zf", float("-inf"), 0),
                       np.zeros(0), np.r_[np.zeros(3), np.full(77, 30.0)],
                       np.zeros(0), 1)
    assert cell.p5_mbps > cell.mean_mbps
    with pytest.warns(RuntimeWarning, match="5%-worst"):
        engine._check_cell(cell)


def test_negative_seed_rejected():
    with pytest.raises(ValueError):
        run_campaign(small(seed=-1))


class _Faults:
    """Make build_precoders fail on chosen (drop, attempt) streams."""

    def __init__(self, monkeypatch, bad):
        self.bad = set(bad)
        self.current = None
        sim, build = engine.simulate_drop, engine.build_precoders

        def simulate(config, seed, variants, drop_id=0):
            self.current = tuple(seed.entropy[1:])
            return sim(config, seed, variants, drop_id)

        def precoders(*args, **kw):
            if self.current in self.bad:
                raise SingularChannelError("rank-deficient channel", bs=0)
            return build(*args, **kw)

        monkeypatch.setattr(engine, "simulate_drop", simulate)
        monkeypatch.setattr(engine, "build_precoders", precoders)


def test_failed_drop_is_retried(monkeypatch):
    cfg = small(n_drops=3, seed=4)
    clean = run_campaign(cfg, schemes=("zf",))
    _Faults(monkeypatch, [(1, 0)])
    summary = run_campaign(cfg, schemes=("zf",))
    cell = summary.cell("sparse", "zf")
    assert cell.n_failed == 0 and summary.ok
    retry = run_drop(cfg, "zf", drop_stream(4, 1, 1))
    got = cell.throughput_mbps.reshape(3, 80)
    ref = clean.cell("sparse", "zf").throughput_mbps.reshape(3, 80)
    np.testing.assert_array_equal(got[1], [r.throughput_mbps for r in retry])
    np.testing.assert_array_equal(got[[0, 2]], ref[[0, 2]])


def test_failure_rate_aborts_cell(monkeypatch):
    _Faults(monkeypatch, [(0, 0), (0, 1)])
    summary = run_campaign(small(n_drops=50), schemes=("zf",))
    cell = summary.cell("sparse", "zf")
    assert cell.n_failed == 1
    assert cell.aborted and not summary.ok
    assert cell.throughput_mbps.size == 49 * 80


def test_one_percent_failures_tolerated(monkeypatch):
    _Faults(monkeypatch, [(0, 0), (0, 1)])
    summary = run_campaign(small(n_drops=100), schemes=("zf",))
    assert summary.cell("sparse", "zf").n_failed == 1
    assert summary.ok


def test_run_drop_propagates_singular(monkeypatch):
    _Faults(monkeypatch, [(0, 0)])
    with pytest.raises(SingularChannelError):
        run_drop(small(), "zf", drop_stream(0, 0))


def test_cdf_example():
    np.testing.assert_array_equal(empirical_cdf([3, 1, 2]),
                                  [[1, 1 / 3], [2, 2 / 3], [3, 1]])


def test_cdf_constant_is_single_step():
    cdf = empirical_cdf([4.0] * 5)
    assert np.all(cdf[:, 0] == 4.0)
    assert cdf[-1, 1] == 1.0


def test_cdf_and_percentile_reject_empty():
    with pytest.raises(ValueError):
        empirical_cdf([])
    with pytest.raises(ValueError):
        percentile([], 5)


@pytest.mark.parametrize("p", [0, 100, -1])
def test_percentile_rejects_p(p):
    with pytest.raises(ValueError):
        percentile([1.0, 2.0], p)


def test_percentile_examples():
    assert percentile(np.arange(1, 101), 5) == 5
    assert percentile([7.5], 5) == 7.5
    assert percentile([7.5], 99) == 7.5


def test_cdf_dkw_uniform():
    x = np.random.default_rng(0).uniform(size=10_000)
    cdf = empirical_cdf(x)
    # compare both sides of every step to the identity CDF
    upper = np.abs(cdf[:, 1] - cdf[:, 0]).max()
    lower = np.abs(cdf[:, 1] - 1 / x.size - cdf[:, 0]).max()
    assert max(upper, lower) < 0.03


def test_percentile_normal_quantile():
    x = np.random.default_rng(1).standard_normal(100_000)
    assert percentile(x, 5) == pytest.approx(-1.645, abs=0.03)


def _cdf_oracle(xs):
    xs = sorted(xs)
    return [(v, (i + 1) / len(xs)) for i, v in enumerate(xs)]


def _percentile_oracle(xs, p):
    # smallest sample whose empirical CDF reaches p/100
    n = len(xs)
    for v in sorted(xs):
        if 100 * sum(1 for y in xs if y <= v) >= p * n:
            return v


samples = st.lists(st.floats(-1e6, 1e6, allow_nan=False), min_size=1,
                   max_size=1000)


@settings(max_examples=200, deadline=None)
@given(samples)
def test_cdf_matches_oracle(xs):
    assert [tuple(r) for r in empirical_cdf(xs)] == _cdf_oracle(xs)


@settings(max_examples=100, deadline=None)
@given(st.lists(st.integers(-50, 50).map(float), min_size=1, max_size=300),
       st.floats(0.01, 99.99))
def test_percentile_matches_oracle(xs, p):
    assert percentile(xs, p) == _percentile_oracle(xs, p)
