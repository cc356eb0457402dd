import csv
import json

import numpy as np
import pytest

from granod.benchmarks import data_path
from granod.cli import main
from granod.evaluation import auroc


def _write_uniform(path, n, m=2, seed=0):
    X = np.random.default_rng(seed).uniform(size=(n, m))
    with open(path, "w") as fh:
        fh.write(",".join(f"x{j}" for j in range(m)) + "\n")
        for row in X:
            fh.write(",".join(repr(float(v)) for v in row) + "\n")


def _kv(text):
    return dict(line.split(": ", 1) for line in text.strip().splitlines())


@pytest.fixture
def hepat():
    return str(data_path("hepatitis.csv")), str(data_path("hepatitis.schema"))


def test_detect_writes_scores_and_report(tmp_path, hepat, capsys):
    data, schema = hepat
    out = tmp_path / "s.csv"
    rc = main(["detect", data, "--schema", schema, "--delta", "1.3", "--lambda", "10",
               "--contamination", "0.1625", "--scores", str(out)])
    assert rc == 0
    rep = _kv(capsys.readouterr().out)
    for key in ("views", "view_weights", "pos", "bnd", "neg", "wall_seconds", "warnings", "auroc"):
        assert key in rep
    assert len(rep["view_weights"].split()) == int(rep["views"])
    assert int(rep["pos"]) + int(rep["bnd"]) + int(rep["neg"]) == 80
    rows = list(csv.DictReader(open(out)))
    assert list(rows[0]) == ["id", "fused", "final", "region"] and len(rows) == 80


def test_detect_twice_gives_identical_files(tmp_path, hepat):
    data, schema = hepat
    args = ["detect", data, "--schema", schema, "--delta", "1.3", "--lambda", "10",
            "--contamination", "0.1625", "--report", str(tmp_path / "r.txt")]
    main(args + ["--scores", str(tmp_path / "a.csv")])
    main(args + ["--scores", str(tmp_path / "b.csv")])
    assert (tmp_path / "a.csv").read_bytes() == (tmp_path / "b.csv").read_bytes()


def test_missing_schema_is_a_one_line_error(tmp_path, hepat, capsys):
    data, _ = hepat
    rc = main(["detect", data, "--schema", str(tmp_path / "gone.schema"), "--delta", "1",
               "--lambda", "1", "--contamination", "0.1", "--scores", str(tmp_path / "s.csv")])
    err = capsys.readouterr().err
    assert rc != 0 and "gone.schema" in err and err.count("\n") == 1


def test_views_single_sample(tmp_path, capsys):
    src = tmp_path / "one.csv"
    src.write_text("x\n0.4\n")
    dump = tmp_path / "v.jsonl"
    assert main(["views", str(src), "--delta", "1", "--dump", str(dump)]) == 0
    recs = [json.loads(l) for l in dump.read_text().splitlines()]
    assert len(recs) == 1 and recs[0]["members"] == [0]
    assert _kv(capsys.readouterr().out)["hierarchy_length"] == "1"


def test_views_random_data_depth_and_last_record(tmp_path, capsys):
    src = tmp_path / "u.csv"
    _write_uniform(src, 256)
    dump = tmp_path / "v.jsonl"
    main(["views", str(src), "--delta", "0.1", "--dump", str(dump)])
    assert int(_kv(capsys.readouterr().out)["hierarchy_length"]) <= 10
    last = json.loads(dump.read_text().splitlines()[-1])
    assert last["members"] == list(range(256))


def test_inject_counts_and_determinism(tmp_path, capsys):
    src = tmp_path / "u.csv"
    _write_uniform(src, 80)
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    for out in (a, b):
        assert main(["inject", str(src), "--kind", "group", "--ratio", "0.1", "--seed", "7",
                     "--output", str(out)]) == 0
    assert a.read_bytes() == b.read_bytes()
    rows = list(csv.DictReader(open(a)))
    assert len(rows) == 88 and sum(r["label"] == "1" for r in rows) == 8


def test_inject_rejects_unknown_kind(tmp_path):
    with pytest.raises(SystemExit) as exc:
        main(["inject", "x.csv", "--kind", "sideways", "--ratio", "0.1", "--output", "y.csv"])
    assert exc.value.code != 0


def test_eval_grid_and_auroc(tmp_path, capsys):
    y = [0] * 18 + [1] * 2
    s = np.linspace(0, 1, 20)
    scores, labels = tmp_path / "s.csv", tmp_path / "l.csv"
    scores.write_text("id,final\n" + "".join(f"{i},{float(v)!r}\n" for i, v in enumerate(s)))
    labels.write_text("label\n" + "".join(f"{v}\n" for v in y))
    roc = tmp_path / "roc.tsv"
    assert main(["eval", str(scores), str(labels), "--roc", str(roc)]) == 0
    rep = _kv(capsys.readouterr().out)
    assert sum(k.startswith("t=") for k in rep) == 20
    assert float(rep["auroc"]) == pytest.approx(auroc(s, y))
    assert rep["t=0.1"] == "precision=1.0000 recall=1.0000"
    lines = roc.read_text().splitlines()
    assert lines[0] == "fpr\ttpr" and lines[-1] == "1.0\t1.0"


def test_stats_on_published_ranks(capsys):
    assert main(["stats", str(data_path("performance_ranks.csv")), "--q-phi", "3.2680"]) == 0
    rep = _kv(capsys.readouterr().out)
    assert float(rep["tau_F"]) == pytest.approx(9.7544, abs=0.02)
    assert float(rep["cd"]) == pytest.approx(3.7261, abs=1e-4)


def test_stats_identical_ranks(tmp_path, capsys):
    t = tmp_path / "r.csv"
    t.write_text("d,a,b,c\nd1,2,2,2\nd2,2,2,2\n")
    main(["stats", str(t)])
    assert float(_kv(capsys.readouterr().out)["tau_chi2"]) == 0.0


def test_stats_malformed_table(tmp_path, capsys):
    t = tmp_path / "r.csv"
    t.write_text("d,a,b\nd1,1,2\nd2,1,oops\n")
    assert main(["stats", str(t)]) != 0
    assert "row 3, column 3" in capsys.readouterr().err
