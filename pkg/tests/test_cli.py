import json
import subprocess
import sys

import pytest

from hbacqec.cli import EXIT_INVALID, EXIT_IO, EXIT_OK, build_parser, main, spec_from_args
from hbacqec.experiments import EXPERIMENTS, ResultTable


def test_subcommands_named_after_experiments():
    parser = build_parser()
    for name in EXPERIMENTS:
        assert parser.parse_args([name]).experiment == name


def test_stdout_csv(capsys):
    assert main(["fidelity-curves", "--p-steps", "3", "--q", "0.4"]) == EXIT_OK
    table = ResultTable.from_csv(capsys.readouterr().out)
    assert table.rows[0][2] == pytest.approx(0.96, abs=1e-12)
    assert len(table.rows) == 3


def test_json_file_output(tmp_path):
    out = tmp_path / "t.json"
    assert main(["hbac-trace", "--iters", "2", "--eps", "0.3", "--format", "json", "-o", str(out)]) == EXIT_OK
    table = ResultTable.from_json(out.read_text())
    assert len(table.rows) == 5
    assert table.provenance["parameters"]["eps"] == 0.3


def test_config_file_and_override(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"p-steps": 4, "q": 0.2, "p_max": 0.3}))
    args = build_parser().parse_args(["fidelity-curves", "--config", str(cfg), "--q", "0.6"])
    spec, output, fmt = spec_from_args(args)
    assert (spec.p_steps, spec.p_max, spec.q) == (4, 0.3, 0.6)
    assert output is None and fmt == "csv"


def test_config_can_set_output(tmp_path):
    cfg = tmp_path / "cfg.json"
    target = tmp_path / "out.csv"
    cfg.write_text(json.dumps({"iters": 1, "output": str(target), "format": "csv"}))
    assert main(["hbac-trace", "--config", str(cfg)]) == EXIT_OK
    assert target.read_text().splitlines()[1].startswith("step,operation")


def test_boolean_and_list_flags():
    args = build_parser().parse_args(["multiround", "--dephase-during-refresh", "false",
                                      "--gate-fidelities", "1,0.9", "--protocol", "six"])
    spec, _, _ = spec_from_args(args)
    assert spec.dephase_during_refresh is False
    assert spec.gate_fidelities == (1.0, 0.9)
    assert spec.protocol == "six"


@pytest.mark.parametrize("argv", [
    ["fidelity-curves", "--p-steps", "0"],
    ["fidelity-curves", "--p-min", "0.4", "--p-max", "0.1"],
    ["hbac-contour", "--temp-min", "-1"],
    ["multiround", "--rounds", "0"],
    ["imperfect-hbac", "--c-max", "3"],
])
def test_invalid_spec_exit_code(argv, capsys):
    assert main(argv) == EXIT_INVALID
    assert "invalid spec" in capsys.readouterr().err


def test_unknown_config_key(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"colour": "blue"}))
    assert main(["fidelity-curves", "--config", str(cfg)]) == EXIT_INVALID


def test_malformed_config(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text("{not json")
    assert main(["fidelity-curves", "--config", str(cfg)]) == EXIT_INVALID
    cfg.write_text("[1, 2]")
    assert main(["fidelity-curves", "--config", str(cfg)]) == EXIT_INVALID


def test_io_exit_codes(tmp_path):
    assert main(["fidelity-curves", "--config", str(tmp_path / "absent.json")]) == EXIT_IO
    assert main(["fidelity-curves", "--p-steps", "2", "-o", str(tmp_path / "no" / "dir.csv")]) == EXIT_IO


def test_argparse_errors_exit_two():
    with pytest.raises(SystemExit) as exc:
        main(["fidelity-curves", "--dephase-during-refresh", "maybe"])
    assert exc.value.code == 2


def test_module_entry_point(tmp_path):
    out = tmp_path / "m.csv"
    res = subprocess.run([sys.executable, "-m", "hbacqec", "critical-ancilla", "--p-min", "0.1", "--p-max", "0.2",
                          "--p-steps", "2", "-o", str(out)], capture_output=True, text=True)
    assert res.returncode == 0, res.stderr
    table = ResultTable.from_csv(out.read_text())
    assert table.columns[:3] == ("p", "rho00_traditional", "rho00_optimal")


def test_byte_identical_cli_runs(tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    for path in (a, b):
        assert main(["init-contour", "--temp-steps", "3", "--iters", "3", "-o", str(path)]) == EXIT_OK
    assert a.read_bytes() == b.read_bytes()
