"""Command-line interface: exit codes, JSON and CSV output."""

import json
import math

import pytest

from loewner_lab import cli
from loewner_lab.config import SolverConfig

HYPERBOLIC_DOC = {
    "version": "1",
    "generator": {"tau": [1.0, 0.0], "herglotz": {"atoms": [{"angle": 0.0, "weight": 0.5}]}},
}

TWO_SEGMENT_DOC = {
    "version": "1",
    "schedule": {
        "segments": [
            {"duration": 0.5, "generator": {"tau": [0.0, 0.0], "herglotz": {"uniform": 1.0}}},
            {
                "duration": 0.5,
                "generator": {
                    "tau": {"angle": 0.0},
                    "herglotz": {"atoms": [{"angle": 0.0, "weight": 0.5}]},
                },
            },
        ],
        "fixed": [[-1.0, 0.0]],
        "tau": [1.0, 0.0],
    },
}


def _write(tmp_path, name, document):
    path = tmp_path / name
    path.write_text(json.dumps(document), encoding="utf-8")
    return str(path)


def _rows(text):
    lines = [line for line in text.splitlines() if line and not line.startswith("#")]
    assert lines[0] == "t,re,im"
    return [tuple(float(v) for v in line.split(",")) for line in lines[1:]]


@pytest.mark.parametrize(
    "fixed, alpha, weight",
    [("-1,1", 0.0, 1.0), ("-2,1", 1.0, 2.0)],
)
def test_synthesize_two_points(capsys, fixed, alpha, weight):
    code = cli.main(["synthesize", "--fixed", fixed, "--dw", "inf", "--beta", "1", "--atoms", "0"])
    assert code == 0
    out, err = capsys.readouterr()
    pick = json.loads(out)["synthesis"]["pick"]
    assert pick["alpha"] == pytest.approx(alpha, abs=1e-12)
    assert [a["weight"] for a in pick["atoms"]] == pytest.approx([weight], abs=1e-12)
    assert "x\tlambda" in err


def test_synthesize_to_file_prints_rates(tmp_path, capsys):
    out_path = tmp_path / "synth.json"
    code = cli.main(
        ["synthesize", "--fixed", "-1,1", "--atoms", "0", "--dw", "0", "--out", str(out_path)]
    )
    assert code == 0
    table = capsys.readouterr().out.splitlines()
    assert table[0] == "x\tlambda"
    # Psi(x) = x - 1/x at +-1 has derivative 2
    assert [float(line.split("\t")[1]) for line in table[1:]] == pytest.approx([2.0, 2.0])
    document = json.loads(out_path.read_text(encoding="utf-8"))
    assert document["synthesis"]["dw"] == 0.0
    assert "disk" in document["synthesis"]
    points = [complex(*r["point"]) for r in document["synthesis"]["rates"]]
    assert all(abs(abs(p) - 1.0) < 1e-12 for p in points)


def test_synthesize_non_interlacing_is_infeasible():
    assert cli.main(["synthesize", "--fixed", "-1,1", "--atoms", "5"]) == 2


def test_malformed_flag_prints_usage(capsys):
    assert cli.main(["synthesize", "--fixed", "a,b"]) == 1
    assert "usage:" in capsys.readouterr().err
    assert cli.main(["verify", "--suite", "nope"]) == 1


def test_join_list_flags():
    argv = ["synthesize", "--fixed", "-1,1", "--beta", "2"]
    assert cli._join_list_flags(argv) == ["synthesize", "--fixed=-1,1", "--beta", "2"]


def test_flow_hyperbolic(tmp_path, monkeypatch):
    monkeypatch.delenv("LOEWNER_LAB_REL_TOL", raising=False)
    monkeypatch.delenv("LOEWNER_LAB_ABS_TOL", raising=False)
    config = _write(tmp_path, "hyperbolic.json", HYPERBOLIC_DOC)
    out = tmp_path / "flow.csv"
    assert cli.main(["flow", "--config", config, "--z0", "0,0", "--t", "1", "--out", str(out)]) == 0
    rows = _rows(out.read_text(encoding="utf-8"))
    t, re, im = rows[-1]
    assert t == 1.0
    assert re == pytest.approx(math.tanh(0.5), abs=1e-8)
    assert abs(im) < 1e-12
    assert [r[0] for r in rows] == sorted(r[0] for r in rows)
    assert all(math.hypot(r[1], r[2]) < 1.0 for r in rows)


def test_flow_start_time(tmp_path, capsys):
    config = _write(tmp_path, "hyperbolic.json", HYPERBOLIC_DOC)
    assert cli.main(["flow", "--config", config, "--s", "0.5", "--t", "1.5"]) == 0
    rows = _rows(capsys.readouterr().out)
    assert rows[0] == (0.5, 0.0, 0.0)
    assert rows[-1][0] == 1.5
    assert rows[-1][1] == pytest.approx(math.tanh(0.5), abs=1e-8)

    assert cli.main(["flow", "--config", config, "--z0", "0.1", "--s", "2", "--t", "2"]) == 0
    assert _rows(capsys.readouterr().out) == [(2.0, 0.1, 0.0)]
    assert cli.main(["flow", "--config", config, "--s", "1", "--t", "0.5"]) == 1


def test_flow_writes_svg(tmp_path):
    config = _write(tmp_path, "hyperbolic.json", HYPERBOLIC_DOC)
    svg = tmp_path / "grid.svg"
    out = tmp_path / "flow.csv"
    assert (
        cli.main(["flow", "--config", config, "--t", "0.5", "--out", str(out), "--svg", str(svg)])
        == 0
    )
    assert svg.read_text(encoding="utf-8").lstrip().startswith("<?xml")


def test_flow_rejects_boundary_start(tmp_path):
    config = _write(tmp_path, "hyperbolic.json", HYPERBOLIC_DOC)
    assert cli.main(["flow", "--config", config, "--z0", "1,0"]) == 2


def test_flow_rejects_unknown_fields(tmp_path):
    document = {**HYPERBOLIC_DOC, "extra": 1}
    config = _write(tmp_path, "bad.json", document)
    assert cli.main(["flow", "--config", config]) == 1


def test_evolve_two_segments(tmp_path, capsys, two_segment_value):
    config = _write(tmp_path, "schedule.json", TWO_SEGMENT_DOC)
    assert cli.main(["evolve", "--config", config, "--z0", "0.5"]) == 0
    rows = _rows(capsys.readouterr().out)
    t, re, im = rows[-1]
    assert t == pytest.approx(1.0)
    assert re == pytest.approx(two_segment_value, abs=1e-7)
    assert re == pytest.approx(0.51047, abs=1e-5)
    assert abs(im) < 1e-10


def test_evolve_empty_window_single_row(tmp_path, capsys):
    config = _write(tmp_path, "schedule.json", TWO_SEGMENT_DOC)
    assert cli.main(["evolve", "--config", config, "--z0", "0.2,0.1", "--s", "0.3", "--t", "0.3"]) == 0
    rows = _rows(capsys.readouterr().out)
    assert rows == [(0.3, 0.2, 0.1)]


def test_evolve_needs_schedule(tmp_path):
    config = _write(tmp_path, "hyperbolic.json", HYPERBOLIC_DOC)
    assert cli.main(["evolve", "--config", config]) == 1


def test_stall_keeps_partial_csv(tmp_path, monkeypatch):
    monkeypatch.setattr(cli, "default_solver_config", lambda: SolverConfig(max_steps=2))
    config = _write(tmp_path, "schedule.json", TWO_SEGMENT_DOC)
    out = tmp_path / "partial.csv"
    assert cli.main(["evolve", "--config", config, "--z0", "0.5", "--out", str(out)]) == 3
    text = out.read_text(encoding="utf-8")
    assert text.endswith("# status: max_steps\n")
    rows = _rows(text)
    assert rows[0] == (0.0, 0.5, 0.0)
    assert rows[-1][0] < 1.0


def test_verify_lemma_suite(capsys):
    assert cli.main(["verify", "--suite", "lemma53", "--seed", "1"]) == 0
    first = capsys.readouterr().out
    report = json.loads(first)
    assert report["passed"] is True
    sweep = report["reports"]["lemma53"]
    assert (sweep["strict_count"], sweep["count"]) == (100, 100)

    assert cli.main(["verify", "--suite", "lemma53", "--seed", "1"]) == 0
    assert capsys.readouterr().out == first


def test_verify_rejects_bad_samples():
    assert cli.main(["verify", "--suite", "ef", "--samples", "0"]) == 1


def test_version(capsys):
    assert cli.main(["--version"]) == 0
    assert capsys.readouterr().out.startswith("loewner-lab ")


def test_verify_all_is_byte_identical(capsys):
    assert cli.main(["verify", "--suite", "all", "--seed", "42"]) == 0
    first = capsys.readouterr().out
    assert cli.main(["verify", "--suite", "all", "--seed", "42"]) == 0
    assert capsys.readouterr().out == first
    assert set(json.loads(first)["reports"]) == {"ef", "cone", "lemma53", "theoremA"}
