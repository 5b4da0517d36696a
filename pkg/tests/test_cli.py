import json
import math

import pytest

from densitometer import cli
from densitometer.weights import WeightSequence


def run(args, *more):
    return cli.main(list(args) + list(more))


# -- sequence descriptors -------------------------------------------------------

def test_parse_seq_forms(tmp_path):
    assert cli.parse_seq('{"kind":"power","c":0.25,"p":2}') == WeightSequence.power(0.25, 2.0)
    assert cli.parse_seq("power:c=0.25,p=2") == WeightSequence.power(0.25, 2.0)
    assert cli.parse_seq("geometric:c=1,rho=0.5") == WeightSequence.geometric(1.0, 0.5)
    f = tmp_path / "seq.json"
    f.write_text('{"kind":"geometric","c":2,"rho":0.25}')
    assert cli.parse_seq(f"@{f}") == WeightSequence.geometric(2.0, 0.25)
    with pytest.raises(ValueError):
        cli.parse_seq("triangular:a=1")


# -- exit codes -------------------------------------------------------------------

def test_usage_error_is_exit_two():
    assert run(["indices", "--seq", "nonsense:x=1"]) == 2
    assert run(["dilate1d", "--in", "[[0,1]]", "--gamma", "0.5"]) == 2
    assert run(["indices", "--seq", "@/no/such/file.json"]) == 2
    assert run(["dilate1d", "--in", "not json", "--gamma", "2"]) == 2


def test_bad_flags_exit_two():
    assert run(["no-such-command"]) == 2
    assert run(["indices"]) == 2  # --seq required


def test_finding_is_exit_one():
    # terms of the quadrupling series rise for many blocks when p is barely > 1
    assert run(["diag", "series", "--seq", "power:c=1,p=1.05"]) == 1


# -- artifact commands ---------------------------------------------------------------

def test_indices_writes_json(tmp_path, capsys):
    code = run(["--out-dir", str(tmp_path), "indices", "--seq", "power:c=1,p=2", "--out", "idx.json"])
    assert code == 0
    payload = json.loads((tmp_path / "idx.json").read_text())
    assert payload["e_bt_est"] == pytest.approx(0.5)
    out = capsys.readouterr().out
    assert "e_bt" in out


def test_dilate1d_artifact(tmp_path):
    code = run(
        ["--out-dir", str(tmp_path), "dilate1d", "--in", "[[0,1]]", "--gamma", "2", "--out", "d.json"]
    )
    assert code == 0
    payload = json.loads((tmp_path / "d.json").read_text())
    assert payload["union"] == [[-2.0, 3.0]]
    assert payload["union_measure"] == 5.0
    assert payload["identity_rhs"] == 5.0


def test_dilate2d_artifact(tmp_path):
    code = run(
        ["--out-dir", str(tmp_path), "dilate2d", "--in", "[[0,1,0,1]]", "--gamma", "2", "--out", "d.json"]
    )
    assert code == 0
    payload = json.loads((tmp_path / "d.json").read_text())
    assert payload["measure"] == 25.0
    assert payload["rects"] == [[-2.0, 3.0, -2.0, 3.0]]


def test_auxfn_round_trip(tmp_path, canonical_ratefn):
    code = run(
        ["--out-dir", str(tmp_path), "auxfn", "--seq", "power:c=0.25,p=2", "--ell-max", "9", "--out", "rate.csv"]
    )
    assert code == 0
    text = (tmp_path / "rate.csv").read_text()
    assert text.splitlines()[0] == "t_lo_log,t_hi_log,floor,deficit"
    assert cli.rate_from_csv(text) == canonical_ratefn


def test_diag_littleo_artifact(tmp_path):
    code = run(
        ["--out-dir", str(tmp_path), "diag", "littleo", "--seq", "power:c=0.25,p=2", "--out", "lo.csv"]
    )
    assert code == 0
    lines = (tmp_path / "lo.csv").read_text().strip().splitlines()
    assert lines[0] == "ell,s_next,breakpoint_log,product"
    assert len(lines) == 9  # products for ell = 1..8


def test_diag_series_artifact(tmp_path):
    code = run(
        ["--out-dir", str(tmp_path), "diag", "series", "--seq", "geometric:c=1,rho=0.5", "--out", "s.csv"]
    )
    assert code == 0
    lines = (tmp_path / "s.csv").read_text().strip().splitlines()
    assert lines[0] == "series,s,term_lo_log,term_hi_log,ratio_to_prev"
    labels = {line.split(",")[0] for line in lines[1:]}
    assert labels == {"doubling_tail", "doubling_root_tail", "quadrupling_tail"}


# -- pipeline -------------------------------------------------------------------------

def test_build_scan_pipeline(tmp_path):
    base = ["--out-dir", str(tmp_path)]
    assert run(base, "build-set", "--seq", "power:c=0.25,p=2", "--n", "255", "--out", "set.json") == 0
    model = json.loads((tmp_path / "set.json").read_text())
    assert set(model) == {"outer", "cubes", "trunc", "seq"}
    assert run(base, "cover", "--set", str(tmp_path / "set.json"), "--m", "2", "--s-hi", "3", "--out", "cover.json") == 0
    cover = json.loads((tmp_path / "cover.json").read_text())
    assert [b["s"] for b in cover["blocks"]] == [2, 3]
    code = run(
        base,
        "scan",
        "--set", str(tmp_path / "set.json"),
        "--t", "0.25,0.05",
        "--points", "10",
        "--rects", "40",
        "--seed", "7",
        "--m", "2",
        "--s-hi", "3",
        "--out", "scan.csv",
        "--summary-out", "summary.json",
    )
    assert code == 0
    summary = json.loads((tmp_path / "summary.json").read_text())
    assert summary["passed"] is True
    assert "runtime" not in json.dumps(summary)
    lines = (tmp_path / "scan.csv").read_text().strip().splitlines()
    assert len(lines) == 1 + 2 * 10


def test_scan_adversarial_point_flagged(tmp_path):
    base = ["--out-dir", str(tmp_path)]
    assert run(base, "build-set", "--seq", "power:c=0.25,p=2", "--n", "255", "--out", "set.json") == 0
    code = run(
        base,
        "scan",
        "--set", str(tmp_path / "set.json"),
        "--t", "0.05",
        "--points", "1",
        "--rects", "50",
        "--m", "2",
        "--s-hi", "3",
        "--points-at", "0.25,0.25",
        "--out", "scan.csv",
    )
    assert code == 0
    row = (tmp_path / "scan.csv").read_text().strip().splitlines()[1]
    assert row.endswith("exceptional")


def test_verify_all_small(tmp_path):
    args = [
        "verify-all",
        "--seq", "power:c=0.25,p=2",
        "--level", "3",
        "--m", "2",
        "--points", "10",
        "--rects", "40",
        "--seed", "11",
    ]
    assert run(args, "--out-dir", str(tmp_path / "a")) == 0
    assert run(args, "--out-dir", str(tmp_path / "b")) == 0
    names = sorted(p.name for p in (tmp_path / "a").iterdir())
    assert names == [
        "cover.json",
        "envelope.csv",
        "indices.json",
        "littleo.csv",
        "rate.csv",
        "scan.csv",
        "scan_summary.json",
        "separation.csv",
        "series.csv",
        "set.json",
        "summary.csv",
    ]
    for name in names:
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()
    steps = (tmp_path / "a" / "summary.csv").read_text().strip().splitlines()
    assert steps[0] == "step,status,detail"
    assert all(line.split(",")[1] == "pass" for line in steps[1:])


def test_rate_csv_top_row_infinity(canonical_ratefn):
    text = cli.rate_to_csv(canonical_ratefn)
    top = text.splitlines()[1]
    assert top.split(",")[1] == "inf"
    assert math.isinf(cli.rate_from_csv(text).branches[-1].t_hi_log)
