import json

import pytest

from explore_plots import cli
from explore_plots.io import (SchemaError, find_replicas, load_steps_csv,
                              load_summary)


def write_replica(root, name, curve, summary=True):
    d = root / name
    d.mkdir(parents=True)
    lines = ["t,cumulative_exploration_steps"]
    lines += [f"{t + 1},{c}" for t, c in enumerate(curve)]
    (d / "steps.csv").write_text("\n".join(lines) + "\n")
    if summary:
        doc = {
            "exploration_steps": int(curve[-1]),
            "total_steps": len(curve),
            "rounds": 1,
            "F": 2,
            "change_times": [1, len(curve) // 2],
            "halted": "horizon",
            "unsound_constants": True,
            "bound_report": {"building_bound": 1e9, "checking_bound": 1e6,
                             "total_bound": 1e9 + 1e6,
                             "observed_exploration_steps": int(curve[-1])},
        }
        (d / "summary.json").write_text(json.dumps(doc))
    return d


def synthetic_runs(tmp_path):
    runs = tmp_path / "runs"
    write_replica(runs, "seed_0", [1, 2, 3, 3, 3, 4])
    write_replica(runs, "seed_1", [1, 1, 2, 2, 3, 3])
    write_replica(runs, "seed_2", [0, 1, 1, 2, 2, 2])
    return runs


def test_load_steps_csv_roundtrip(tmp_path):
    d = write_replica(tmp_path, "seed_0", [0, 1, 1, 2])
    t, c = load_steps_csv(d / "steps.csv")
    assert t.tolist() == [1, 2, 3, 4]
    assert c.tolist() == [0, 1, 1, 2]


def test_load_steps_csv_rejects_bad_header(tmp_path):
    p = tmp_path / "steps.csv"
    p.write_text("time,count\n1,1\n")
    with pytest.raises(SchemaError):
        load_steps_csv(p)


def test_load_steps_csv_rejects_decreasing_count(tmp_path):
    p = tmp_path / "steps.csv"
    p.write_text("t,cumulative_exploration_steps\n1,5\n2,3\n")
    with pytest.raises(SchemaError):
        load_steps_csv(p)


def test_load_summary_requires_keys(tmp_path):
    p = tmp_path / "summary.json"
    p.write_text(json.dumps({"rounds": 1}))
    with pytest.raises(SchemaError):
        load_summary(p)


def test_find_replicas_sorted(tmp_path):
    runs = synthetic_runs(tmp_path)
    names = [d.name for d in find_replicas(runs)]
    assert names == ["seed_0", "seed_1", "seed_2"]
    with pytest.raises(SchemaError):
        find_replicas(tmp_path / "nowhere")


def test_explore_curve_produces_figure(tmp_path):
    runs = synthetic_runs(tmp_path)
    out = tmp_path / "fig.png"
    assert cli.main(["explore-curve", "--runs", str(runs),
                     "--out", str(out)]) == 0
    assert out.exists() and out.stat().st_size > 0


def test_bound_gap_produces_figure(tmp_path):
    runs = synthetic_runs(tmp_path)
    out = tmp_path / "gap.png"
    assert cli.main(["bound-gap", "--runs", str(runs), "--out", str(out)]) == 0
    assert out.exists()


def test_schema_violation_exits_nonzero_and_writes_nothing(tmp_path):
    runs = synthetic_runs(tmp_path)
    (runs / "seed_1" / "steps.csv").write_text("bogus\n1,2\n")
    out = tmp_path / "fig.png"
    assert cli.main(["explore-curve", "--runs", str(runs),
                     "--out", str(out)]) != 0
    assert not out.exists()


def test_mismatched_time_axes_rejected(tmp_path):
    runs = tmp_path / "runs"
    write_replica(runs, "seed_0", [1, 2, 3])
    d = runs / "seed_1"
    d.mkdir()
    (d / "steps.csv").write_text(
        "t,cumulative_exploration_steps\n5,1\n6,2\n7,3\n")
    out = tmp_path / "fig.png"
    assert cli.main(["explore-curve", "--runs", str(runs),
                     "--out", str(out)]) != 0
    assert not out.exists()
