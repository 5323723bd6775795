import json

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.stats import kendalltau

from golden_configs import GOLDEN, GOLDEN_DIR
from harmonic_dht.cli import EXIT_CONFIG, EXIT_OK, EXIT_RUNTIME, main
from harmonic_dht.experiments import (
    SETTLE_FIELDS,
    EXPERIMENTS,
    ConfigError,
    ExperimentConfig,
    MetricsRecord,
    _probe,
    bootstrap_overlay,
    run,
    run_settling,
    settled_point,
)
from harmonic_dht.records import EmitError, emit, load, parse, render
from harmonic_dht.rng import STREAMS, stream
from harmonic_dht.stats import mann_kendall, settled_index


def small_settle(**kw):
    base = dict(n=40, m=400, steps=20, probes_per_step=8, seed=3)
    base.update(kw)
    return ExperimentConfig.for_experiment("settle", **base)


# -- records -------------------------------------------------------------------

def test_settle_header_is_fixed():
    recs = run_settling(small_settle())
    text = render(recs, "csv", {"seed": 3}, SETTLE_FIELDS)
    lines = text.splitlines()
    assert json.loads(lines[0][2:]) == {"seed": 3}
    assert lines[1] == "step,adaptive_queries,mean_hops,p99_hops,max_hops,resolved_fraction"
    assert len(lines) == 2 + 20


@settings(max_examples=50, deadline=None)
@given(st.lists(st.tuples(st.integers(0, 10 ** 6),
                          st.floats(-1e6, 1e6, allow_nan=False, allow_subnormal=False)),
                min_size=1, max_size=20),
       st.sampled_from(["csv", "json"]))
def test_round_trip(rows, fmt):
    recs = [{"i": i, "x": x} for i, x in rows]
    meta, back = parse(render(recs, fmt, {"k": 1}), fmt)
    assert meta == {"k": 1}
    assert [r["i"] for r in back] == [r["i"] for r in recs]
    for r, b in zip(recs, back):
        assert b["x"] == pytest.approx(r["x"], rel=5e-6, abs=1e-300)


def test_metrics_record_round_trip(tmp_path):
    recs = [MetricsRecord(1, 1, 12.345678, 30.0, 31, 1.0, None)]
    for fmt in ("csv", "json"):
        p = emit(recs, fmt, tmp_path / f"r.{fmt}", {"seed": 9})
        meta, back = load(p)
        assert meta == {"seed": 9}
        assert back[0]["mean_hops"] == 12.3457
        assert back[0]["max_hops"] == 31
        assert back[0]["control_mean_hops"] is None


def test_empty_refused(tmp_path):
    with pytest.raises(EmitError):
        emit([], "csv", tmp_path / "x.csv")
    with pytest.raises(EmitError):
        render([{"a": 1}], "xml")


def test_io_error_names_path(tmp_path):
    bad = tmp_path / "missing" / "out.csv"
    with pytest.raises(EmitError, match="missing"):
        emit([{"a": 1}], "csv", bad)
    with pytest.raises(EmitError, match="nope"):
        load(tmp_path / "nope.csv")


# -- config --------------------------------------------------------------------

@pytest.mark.parametrize("kw", [
    dict(n=1, m=10), dict(n=20, m=10), dict(steps=0), dict(probes_per_step=0),
    dict(seed=-1), dict(seed=2 ** 64), dict(bootstrap="magic"), dict(shortcut_count=0),
])
def test_settle_config_rejected(kw):
    with pytest.raises(ConfigError):
        ExperimentConfig.for_experiment("settle", **kw)


def test_other_configs_rejected():
    with pytest.raises(ConfigError):
        ExperimentConfig.for_experiment("nonsense")
    with pytest.raises(ConfigError):
        ExperimentConfig.for_experiment("baseline", n=100, c_local=0, c_short=0)
    with pytest.raises(ConfigError):
        ExperimentConfig.for_experiment("hierarchy", n=3)
    with pytest.raises(ConfigError):
        ExperimentConfig.for_experiment("reach", offsets=())


# -- settling mechanics --------------------------------------------------------

def test_probes_do_not_mutate():
    cfg = small_settle()
    o = bootstrap_overlay(cfg)
    before = o.checksum()
    _probe(o, o.keys_array(), 500, np.random.default_rng(0))
    assert o.checksum() == before


def test_probe_count_leaves_adaptive_stream_alone():
    outs = []
    for probes in (1, 7, 50):
        sink = []
        run_settling(small_settle(probes_per_step=probes, steps=200), sink)
        outs.append(sink[0].checksum())
    assert len(set(outs)) == 1


def test_comparison_does_not_perturb_treatment():
    a = run_settling(small_settle())
    b = run_settling(small_settle(comparison=True))
    assert [r.mean_hops for r in a] == [r.mean_hops for r in b]
    assert all(r.control_mean_hops is not None for r in b)


def test_resolved_fraction_is_one():
    assert all(r.resolved_fraction == 1.0 for r in run_settling(small_settle(steps=50)))


def test_join_bootstrap_mode():
    recs = run_settling(small_settle(bootstrap="join"))
    assert len(recs) == 20


def test_streams_differ_and_repeat():
    draws = [stream(1, s).integers(1 << 62, size=4).tolist() for s in STREAMS]
    assert len({tuple(d) for d in draws}) == len(STREAMS)
    assert stream(1, "probes").random() == stream(1, "probes").random()
    with pytest.raises(ValueError):
        stream(1, "bogus")


# -- trend test ----------------------------------------------------------------

@pytest.mark.parametrize("seed", range(6))
def test_mann_kendall_matches_kendall_tau(seed):
    rng = np.random.default_rng(seed)
    n = 60 + 40 * seed
    x = rng.normal(size=n) + 0.004 * seed * np.arange(n)
    if seed % 2:
        x = np.round(x, 1)  # introduce ties
    _, p = mann_kendall(x)
    ref = kendalltau(np.arange(n), x, method="asymptotic").pvalue
    assert p == pytest.approx(ref, rel=0.05, abs=2e-3)


def test_settled_index():
    rng = np.random.default_rng(4)
    decay = 30 * np.exp(-np.arange(5000) / 600) + rng.normal(0, 0.3, 5000)
    i = settled_index(decay)
    assert i is not None and 1000 <= i <= 4000
    assert settled_index(np.arange(3000.0)) is None
    recs = [MetricsRecord(k + 1, k + 1, float(v), 0.0, 0, 1.0) for k, v in enumerate(decay)]
    assert settled_point(recs) == i + 1


def test_mann_kendall_short():
    with pytest.raises(ValueError):
        mann_kendall([1.0, 2.0])


# -- CLI -----------------------------------------------------------------------

def test_cli_exit_codes(tmp_path, capsys):
    out = tmp_path / "s.json"
    assert main(["stationary", "--n", "4", "--format", "json", "--out", str(out)]) == EXIT_OK
    doc = json.loads(out.read_text())
    assert doc["metadata"]["n"] == 4 and len(doc["records"]) == 4
    assert main(["settle", "--n", "0"]) == EXIT_CONFIG
    assert main(["settle", "--bogus", "1"]) == EXIT_CONFIG
    assert main(["frobnicate"]) == EXIT_CONFIG
    assert main(["settle", "--n", "ten"]) == EXIT_CONFIG
    bad = tmp_path / "nodir" / "x.csv"
    assert main(["reach", "--offsets", "1", "--modulus", "8", "--steps", "2",
                 "--out", str(bad)]) == EXIT_RUNTIME
    assert "nodir" in capsys.readouterr().err


def test_cli_stdout(capsys):
    assert main(["reach", "--offsets", "1", "--modulus", "16", "--steps", "3"]) == EXIT_OK
    lines = capsys.readouterr().out.splitlines()
    assert lines[1:] == ["steps,reach,bound", "0,1,1", "1,3,3", "2,5,5", "3,7,7"]


def test_config_file_with_override(tmp_path, capsys):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# small run\nn = 30\nm = 300\nsteps = 5\nprobes_per_step = 4\n"
                   .replace("probes_per_step", "probes"))
    out = tmp_path / "o.csv"
    assert main(["settle", "--config", str(cfg), "--steps", "7", "--out", str(out)]) == 0
    meta, recs = load(out)
    assert meta["n"] == 30 and meta["steps"] == 7 and len(recs) == 7
    cfg.write_text("colour = blue\n")
    assert main(["settle", "--config", str(cfg)]) == EXIT_CONFIG
    assert main(["settle", "--config", str(tmp_path / "absent.cfg")]) == EXIT_CONFIG


def test_run_dispatch_every_experiment():
    assert {k.replace("-", "_") for k in GOLDEN} == set(EXPERIMENTS)
    fields, recs = run(ExperimentConfig.for_experiment("reach", offsets=(1,), modulus=8,
                                                       steps=1))
    assert fields is None and recs[-1] == {"steps": 1, "reach": 3, "bound": 3}


@pytest.mark.parametrize("name", sorted(GOLDEN))
def test_golden_output(name, tmp_path):
    out = tmp_path / f"{name}.csv"
    assert main(GOLDEN[name] + ["--out", str(out)]) == EXIT_OK
    assert out.read_bytes() == (GOLDEN_DIR / f"{name}.csv").read_bytes()
