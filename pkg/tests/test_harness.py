import io
import json

import pytest

from mbasim.cli import main as cli_main
from mbasim.config import SimplifyConfig
from mbasim.harness import (
    load_dataset,
    report,
    run_dataset,
)


def write(tmp_path, name, text):
    p = tmp_path / name
    p.write_text(text)
    return p


def test_load_dataset_formats(tmp_path):
    p = write(tmp_path, "d.csv",
              "# header comment\n"
              "x+(x&y)-2*(x|y)+42,x+(x&y)-2*(x|y)+42\n"
              "x+y-z\tx+y-z\textra-field-ignored\n")
    entries = load_dataset(p)
    assert len(entries) == 2
    assert entries[0].complex_expr == "x+(x&y)-2*(x|y)+42"
    assert entries[1].ground_truth == "x+y-z"
    assert all(e.error is None for e in entries)


def test_load_dataset_malformed_lines(tmp_path):
    p = write(tmp_path, "d.csv",
              "x+y,x+y\n"
              "only-one-field\n"
              "x+*z,x\n")
    entries = load_dataset(p)
    assert len(entries) == 3
    bad = [e for e in entries if e.error]
    assert len(bad) == 2
    assert bad[0].line == 2
    with pytest.raises(ValueError):
        load_dataset(p, strict=True)


def test_run_dataset_toy_linear(tmp_path):
    p = write(tmp_path, "toy.csv",
              "x+y-(x&y),x|y\n"
              "(x&~y)+(x&y),x\n"
              "x^y^x^y,0\n")
    cfg = SimplifyConfig(check_samples=500)
    records, summary = run_dataset(load_dataset(p), cfg)
    assert summary.total == 3
    assert summary.identical == 3
    assert summary.percent == 100.0
    assert summary.unproven == 0 and summary.timeout == 0


def test_run_dataset_empty():
    records, summary = run_dataset([])
    assert records == [] and summary.total == 0
    assert summary.percent == 0.0


def test_run_dataset_e3_simba_unproven(tmp_path):
    p = write(tmp_path, "e3.csv", "(x&y)*(x|y)+(x&~y)*(~x&y),x&y\n")
    cfg = SimplifyConfig(check_samples=500)
    records, summary = run_dataset(load_dataset(p), cfg, engine="simba")
    # The linear core outputs x&y, which matches the listed ground truth
    # string, but the entry is not reducible: verify still says identical
    # against the gt *string*; the interesting row is gt = e3 itself.
    p2 = write(tmp_path, "e3b.csv",
               "(x&y)*(x|y)+(x&~y)*(~x&y),(x&y)*(x|y)+(x&~y)*(~x&y)\n")
    records, summary = run_dataset(load_dataset(p2), cfg, engine="simba")
    assert summary.unproven == 1


def test_run_dataset_rejects_unknown_engine():
    with pytest.raises(ValueError):
        run_dataset([], engine="magic")


def test_summary_counts_sum(tmp_path):
    p = write(tmp_path, "mix.csv",
              "x+y,x+y\n"
              "bad line without comma\n"
              "(x&y)+(x|y),x+y\n")
    cfg = SimplifyConfig(check_samples=500)
    entries = load_dataset(p)
    records, summary = run_dataset(entries, cfg)
    assert summary.invalid == 1
    assert summary.total == len(records) == 2
    assert summary.identical + summary.equivalent + summary.unproven + \
        summary.timeout == summary.total


def test_report_csv_and_json_deterministic(tmp_path):
    p = write(tmp_path, "toy.csv", "x+y-(x&y),x|y\n(x&y)|(x^y),x|y\n")
    cfg = SimplifyConfig(check_samples=200)
    records, summary = run_dataset(load_dataset(p), cfg)

    outs = []
    for _ in range(2):
        sink = io.StringIO()
        report(records, summary, sink, fmt="csv")
        outs.append(sink.getvalue())
    assert outs[0] == outs[1]
    assert "# percent=100.0" in outs[0]

    sink = io.StringIO()
    report(records, summary, sink, fmt="json")
    lines = sink.getvalue().splitlines()
    rows = [json.loads(l) for l in lines]
    assert rows[-1]["summary"]["total"] == 2
    assert rows[0]["outcome"] in ("identical", "equivalent")
    assert "wall_ms" not in rows[0]

    sink = io.StringIO()
    report(records, summary, sink, fmt="json", timing=True)
    first = json.loads(sink.getvalue().splitlines()[0])
    assert "wall_ms" in first

    with pytest.raises(ValueError):
        report(records, summary, io.StringIO(), fmt="xml")


def test_cli_simplify(capsys):
    rc = cli_main(["simplify", "((-x)^y)-2*((~-x)&y)"])
    assert rc == 0
    assert capsys.readouterr().out.strip() == "-x-y"

    rc = cli_main(["simplify", "x&y", "--engine", "simba", "--bits", "8"])
    assert rc == 0
    assert capsys.readouterr().out.strip() == "x&y"

    rc = cli_main(["simplify", "x+"])
    assert rc == 2


def test_cli_run_exit_codes(tmp_path, capsys):
    good = write(tmp_path, "good.csv", "x+y-(x&y),x|y\n")
    assert cli_main(["run", str(good)]) == 0
    capsys.readouterr()

    bad = write(tmp_path, "bad.csv",
                "(x&y)*(x|y)+(x&~y)*(~x&y),(x&y)*(x|y)+(x&~y)*(~x&y)\n")
    assert cli_main(["run", str(bad), "--engine", "simba"]) == 1
    capsys.readouterr()
    assert cli_main(["run", str(bad), "--engine", "simba", "--no-fail"]) == 0
    capsys.readouterr()

    assert cli_main(["run", str(tmp_path / "missing.csv")]) == 2


def test_cli_run_output_file_and_config(tmp_path, capsys):
    data = write(tmp_path, "d.csv", "x+y-(x&y),x|y\n")
    conf = write(tmp_path, "conf.ini", "engine=gamba\nbits=64\nformat=json\n")
    out = tmp_path / "report.jsonl"
    rc = cli_main(["run", str(data), "--config", str(conf), "--output", str(out)])
    assert rc == 0
    lines = out.read_text().splitlines()
    assert json.loads(lines[0])["outcome"] == "identical"

    # Explicit flags win over the config file.
    rc = cli_main(["run", str(data), "--config", str(conf), "--format", "csv",
                   "--output", str(out)])
    assert rc == 0
    assert out.read_text().startswith("line,")


def test_cli_gen_tables(tmp_path, capsys):
    rc = cli_main(["gen-tables", "--out", str(tmp_path / "tables")])
    assert rc == 0
    assert (tmp_path / "tables" / "bitwise_2.txt").exists()
