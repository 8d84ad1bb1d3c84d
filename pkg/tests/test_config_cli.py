import json
import os

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from disloc import config as cfgmod
from disloc.cli import main
from disloc.config import ConfigError, RunConfig


@settings(max_examples=40, deadline=None)
@given(
    st.sampled_from(cfgmod.COMMANDS),
    st.floats(0.05, 0.95),
    st.floats(1e-12, 1e-3),
    st.lists(st.integers(1, 16), min_size=1, max_size=5, unique=True),
    st.tuples(st.floats(0.01, 0.99), st.floats(0.01, 0.99)),
)
def test_ini_roundtrip_bit_exact(cmd, a, tol, ns, p):
    cfg = RunConfig(cmd=cmd, a=a, tol=tol, n_list=tuple(sorted(ns)), p_ref=p).validate()
    assert cfgmod.loads(cfgmod.dumps(cfg)) == cfg


@pytest.mark.parametrize(
    "change, msg",
    [
        ({"a": 0.01}, "admissible range"),
        ({"beta_name": "nope"}, "unknown beta"),
        ({"n_list": (1, 4, 2)}, "ascending"),
        ({"n_list": (1, 32)}, "allow_large_n"),
        ({"p_ref": (1.0, 0.5)}, "open unit square"),
        ({"resolution": 101}, "even"),
        ({"r_name": "corrupted"}, "unknown smoothing"),
    ],
)
def test_validation_messages(change, msg):
    with pytest.raises(ConfigError, match=msg):
        RunConfig(**change).validate()


def test_large_n_opt_in():
    assert RunConfig(n_list=(1, 32), allow_large_n=True).validate().n_list == (1, 32)


def test_unknown_key_rejected():
    with pytest.raises(ConfigError, match="unknown key"):
        cfgmod.loads("[run]\nbogus = 1\n")
    with pytest.raises(ConfigError, match="cannot parse"):
        cfgmod.loads("[quadrature]\norder = eight\n")


def test_flags_override_file(tmp_path, capsys):
    ini = tmp_path / "c.ini"
    ini.write_text("[run]\na = 0.3\nbeta_name = dy\n[quadrature]\norder = 10\n")
    assert main(["build", "--config", str(ini), "--a", "0.4", "--dump-config"]) == 0
    cfg = cfgmod.loads(capsys.readouterr().out)
    assert (cfg.a, cfg.beta_name, cfg.order, cfg.cmd) == (0.4, "dy", 10, "build")


def test_build_outputs(tmp_path):
    out = tmp_path / "b"
    assert main(["build", "--n", "4", "--out", str(out)]) == 0
    s = json.loads((out / "summary.json").read_text())
    assert s["circulation"] == pytest.approx(1.0, abs=1e-12)
    assert s["jump_integral"] == pytest.approx(1.0, abs=1e-8)
    assert s["array"]["segment_count"] == 16
    assert s["array"]["total_cut_length"] == pytest.approx(0.5)
    assert cfgmod.load(out / "config.ini") == cfgmod.loads((out / "config.ini").read_text())


def test_config_error_exit_code(tmp_path, capsys):
    assert main(["build", "--a", "0.01", "--out", str(tmp_path)]) == 2
    assert "admissible range" in capsys.readouterr().err
    assert main(["torsion", "--p-ref", "nope", "--out", str(tmp_path)]) == 2


def test_injected_fault_fails_checks(tmp_path):
    out = tmp_path / "f"
    assert main(["check", "--r", "corrupted", "--inject-fault", "corrupted-r", "--out", str(out)]) == 1
    rep = json.loads((out / "report.json").read_text())
    failed = {r["name"] for r in rep["results"] if not r["passed"]}
    assert "smoothing function admissible" in failed


@pytest.mark.parametrize("argv", [["build", "--n", "2"], ["bravais", "--resolution", "80"]])
def test_rerun_byte_identical(tmp_path, argv):
    out = str(tmp_path / "o")
    assert main(argv + ["--out", out]) == 0
    first = {f: open(os.path.join(out, f), "rb").read() for f in sorted(os.listdir(out))}
    assert main(argv + ["--out", out]) == 0
    second = {f: open(os.path.join(out, f), "rb").read() for f in sorted(os.listdir(out))}
    assert first == second


def test_converge_small_cli(tmp_path):
    out = tmp_path / "c"
    assert main(["converge", "--n-list", "1,2", "--n-tests", "2", "--out", str(out)]) == 0
    lines = (out / "table.csv").read_text().splitlines()
    assert lines[0] == "n,test_id,gap,bound,slope_cum,bound_ok" and len(lines) == 5
