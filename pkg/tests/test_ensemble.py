import csv
import json

import pytest

import glpsim as g
from glpsim.errors import BatchError, ConfigError, ParseError


def maxdeg_config(**over):
    base = dict(
        experiment="maxdeg",
        p_grid=(0.5,),
        steps=400,
        replicas=3,
        base_seed=0,
        width=1,
        min_success=1.0,
        params={"snapshot_times": (100, 400)},
    )
    base.update(over)
    return g.EnsembleConfig(**base)


def test_config_validation():
    with pytest.raises(ConfigError):
        maxdeg_config(experiment="nope")
    with pytest.raises(ConfigError):
        maxdeg_config(p_grid=())
    with pytest.raises(ConfigError):
        maxdeg_config(replicas=0)
    with pytest.raises(ConfigError):
        maxdeg_config(width=0)
    with pytest.raises(ConfigError):
        maxdeg_config(min_success=1.5)


def test_single_replica_aggregate_identity():
    rep = g.run_ensemble(maxdeg_config(replicas=1))
    assert rep.replica_count == 1
    for agg in rep.aggregates:
        matching = [r for r in rep.rows if (r.t, r.metric) == (agg["t"], agg["metric"])]
        assert len(matching) == 1
        assert agg["mean"] == matching[0].value
        assert agg["stderr"] == 0.0
        assert agg["n"] == 1


def test_aggregates_match_sequential_runs():
    rep = g.run_ensemble(maxdeg_config(replicas=5))
    # oracle: run each replica directly through the process module
    for agg in rep.aggregates:
        vals = []
        for r in range(5):
            res = g.run(
                g.ProcessParams(p=0.5, steps=400, seed=r, snapshot_times=(100, 400))
            )
            vals.append({s.t: s.max_degree for s in res.snapshots}[agg["t"]])
        assert agg["mean"] == pytest.approx(sum(vals) / 5)
        assert agg["n"] == 5


def test_parallel_equals_serial():
    serial = g.run_ensemble(maxdeg_config(replicas=4, width=1))
    parallel = g.run_ensemble(maxdeg_config(replicas=4, width=2))
    assert serial.rows == parallel.rows
    assert serial.aggregates == parallel.aggregates


def test_same_config_same_report():
    a = g.run_ensemble(maxdeg_config())
    b = g.run_ensemble(maxdeg_config())
    assert a == b


def test_report_round_trip(tmp_path):
    rep = g.run_ensemble(maxdeg_config())
    path = tmp_path / "report.json"
    g.write_report(rep, path)
    back = g.read_report(path)
    assert back == rep


def test_csv_row_count(tmp_path):
    rep = g.run_ensemble(maxdeg_config(replicas=4))
    path = tmp_path / "rows.csv"
    g.write_rows_csv(rep, path)
    with open(path) as fh:
        rows = list(csv.reader(fh))
    # header + replicas x metrics (2 snapshot times -> 2 metric rows each)
    assert rows[0] == ["p", "seed", "t", "metric", "value"]
    assert len(rows) - 1 == 4 * 2 == len(rep.rows)


def test_read_report_diagnostics(tmp_path):
    rep = g.run_ensemble(maxdeg_config())
    path = tmp_path / "report.json"
    g.write_report(rep, path)

    text = path.read_text()
    truncated = tmp_path / "trunc.json"
    truncated.write_text(text[: len(text) // 2])
    with pytest.raises(ParseError):
        g.read_report(truncated)

    doc = json.loads(text)
    doc["schema"] = "glp-report/999"
    wrong = tmp_path / "wrong.json"
    wrong.write_text(json.dumps(doc))
    with pytest.raises(ParseError, match="schema"):
        g.read_report(wrong)

    del doc["schema"]
    missing = tmp_path / "missing.json"
    missing.write_text(json.dumps(doc))
    with pytest.raises(ParseError, match="missing field"):
        g.read_report(missing)

    doc2 = json.loads(text)
    doc2["rows"][0] = {"bogus": 1}
    bad = tmp_path / "badrow.json"
    bad.write_text(json.dumps(doc2))
    with pytest.raises(ParseError, match="row"):
        g.read_report(bad)


def test_failure_isolation_and_gate():
    # cliquegrowth demands steps == 2 * max(t_values); half the grid violates
    # nothing here -- instead use arrival with an unreachable vertex to fail
    cfg = g.EnsembleConfig(
        experiment="arrival",
        p_grid=(1.0, 0.0),
        steps=50,
        replicas=2,
        params={"vertex": 10},
    )
    rep = g.run_ensemble(cfg)
    # p=1.0 works (vertex 10 arrives at step 9); p=0.0 never grows
    assert len(rep.failures) == 2
    assert all(f["p"] == 0.0 for f in rep.failures)
    assert rep.success_fraction == pytest.approx(0.5)
    assert not rep.gate_passed()
    relaxed = g.EnsembleConfig(
        experiment="arrival",
        p_grid=(1.0, 0.0),
        steps=50,
        replicas=2,
        min_success=0.5,
        params={"vertex": 10},
    )
    assert g.run_ensemble(relaxed).gate_passed()


def test_all_failures_raise_batch_error():
    cfg = g.EnsembleConfig(
        experiment="arrival", p_grid=(0.0,), steps=20, replicas=3,
        params={"vertex": 5},
    )
    with pytest.raises(BatchError):
        g.run_ensemble(cfg)


def test_version_and_schema_fields():
    rep = g.run_ensemble(maxdeg_config())
    assert rep.schema == "glp-report/1"
    assert rep.version == g.__version__
    assert rep.config["experiment"] == "maxdeg"


def test_cliquegrowth_experiment_steps_contract():
    cfg = g.EnsembleConfig(
        experiment="cliquegrowth", p_grid=(0.5,), steps=1000, replicas=1,
        params={"t_values": (200, 500), "m": 5, "topk": 8},
    )
    rep = g.run_ensemble(cfg)
    metrics = {r.metric for r in rep.rows}
    assert metrics == {"pair_fraction", "clique_size", "topk_clique_size"}
    bad = g.EnsembleConfig(
        experiment="cliquegrowth", p_grid=(0.5,), steps=999, replicas=1,
        params={"t_values": (200, 500), "m": 5, "topk": 8},
    )
    with pytest.raises(BatchError):  # every replica rejects the step mismatch
        g.run_ensemble(bad)
