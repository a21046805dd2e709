"""Command-line interface: exit codes, file outputs, verification report."""

import json
import shutil
import subprocess

import pytest

from discflux import config_digest, preset, save_config
from discflux.cli import main
from discflux.config import from_dict


def small_config(**overrides):
    raw = {
        "domain": {"xmin": -1.0, "xmax": 1.0},
        "interfaces": [0.0],
        "fluxes": [{"kind": "linear"}, {"kind": "quadratic"}],
        "initial": {
            "kind": "piecewise_constant",
            "breakpoints": [-0.5],
            "values": [1.0, 2.0],
        },
        "lambda": 0.4,
        "t_end": 0.1,
        "resolutions": [16, 32],
        "reference_n": 64,
    }
    raw.update(overrides)
    return from_dict(raw)


# {{{ run


def test_run_writes_snapshots_and_meta(tmp_path, capsys):
    out_a = tmp_path / "a"
    assert main(["run", "--preset", "experiment1", "--n", "64",
                 "--out", str(out_a)]) == 0
    names = sorted(p.name for p in out_a.iterdir())
    assert names == ["meta.json", "snapshot_t0.3.csv",
                     "snapshot_t0.6.csv", "snapshot_t0.9.csv"]
    lines = (out_a / "snapshot_t0.3.csv").read_text().splitlines()
    assert lines[0] == "x_center,u"
    assert len(lines) == 65

    meta = json.loads((out_a / "meta.json").read_text())
    assert meta["n"] == 64
    assert meta["config_digest"] == config_digest(preset("experiment1"))
    assert meta["dt"] == pytest.approx(0.5 * meta["dx"])
    assert meta["t_end"] == 0.9
    for snap in meta["snapshots"]:
        assert abs(snap["time"] - snap["requested"]) < meta["dt"]

    # a second run must reproduce every output byte for byte
    out_b = tmp_path / "b"
    assert main(["run", "--preset", "experiment1", "--n", "64",
                 "--out", str(out_b)]) == 0
    for name in names:
        assert (out_a / name).read_bytes() == (out_b / name).read_bytes()


def test_run_accepts_config_file(tmp_path):
    path = tmp_path / "exp.yaml"
    save_config(small_config(snapshots=[0.1]), path)
    assert main(["run", "--config", str(path), "--n", "16",
                 "--out", str(tmp_path / "out")]) == 0
    assert (tmp_path / "out" / "snapshot_t0.1.csv").exists()


# }}}


# {{{ convergence


def test_convergence_prints_and_writes_table(tmp_path, capsys):
    path = tmp_path / "exp.yaml"
    save_config(small_config(), path)
    csv_path = tmp_path / "table.csv"
    assert main(["convergence", "--config", str(path),
                 "--out", str(csv_path)]) == 0
    out = capsys.readouterr().out
    lines = out.strip().splitlines()
    assert lines[0] == "n,l1_error,ooc"
    assert lines[1].startswith("16,") and lines[1].endswith(",")
    assert lines[2].startswith("32,") and not lines[2].endswith(",")
    table = "".join(ln + "\n" for ln in lines if not ln.startswith("wrote"))
    assert csv_path.read_text() == table


def test_convergence_against_itself_is_exactly_zero(tmp_path, capsys):
    path = tmp_path / "exp.yaml"
    save_config(small_config(resolutions=[32], reference_n=32), path)
    assert main(["convergence", "--config", str(path)]) == 0
    lines = capsys.readouterr().out.strip().splitlines()
    assert lines[1] == "32,0,"


# }}}


# {{{ verify


@pytest.mark.parametrize("name", ["experiment1", "experiment2"])
def test_verify_passes_on_presets(name, capsys):
    assert main(["verify", "--preset", name]) == 0
    lines = capsys.readouterr().out.strip().splitlines()
    checks = {ln.split()[0]: ln.split()[1] for ln in lines}
    assert checks == {
        "cfl": "PASS",
        "steady_state": "PASS",
        "monotonicity": "PASS",
        "tvd": "PASS",
        "entropy_residual": "PASS",
        "temporal_tv": "PASS",
        "scheme_equivalence": "PASS",
    }


def test_verify_reports_cfl_violation(tmp_path, capsys):
    path = tmp_path / "exp.yaml"
    save_config(small_config(**{"lambda": 2.0}), path)
    assert main(["verify", "--config", str(path)]) == 3
    lines = capsys.readouterr().out.strip().splitlines()
    assert lines[0].split()[:2] == ["cfl", "FAIL"]
    assert all(ln.split()[1] == "SKIP" for ln in lines[1:])


def test_verify_skips_interface_checks_without_interfaces(tmp_path, capsys):
    path = tmp_path / "exp.yaml"
    save_config(small_config(interfaces=[], fluxes=[{"kind": "quadratic"}]), path)
    assert main(["verify", "--config", str(path)]) == 0
    lines = capsys.readouterr().out.strip().splitlines()
    steady = next(ln for ln in lines if ln.startswith("steady_state"))
    assert steady.split()[1] == "SKIP"
    assert "no interfaces" in steady


# }}}


# {{{ failure modes


@pytest.mark.parametrize("argv", [
    [],
    ["run"],
    ["run", "--preset", "experiment1"],  # missing --n
    ["run", "--preset", "experiment1", "--config", "x.yaml", "--n", "16"],
    ["explode", "--preset", "experiment1"],
])
def test_usage_errors_exit_one(argv, capsys):
    with pytest.raises(SystemExit) as excinfo:
        main(argv)
    assert excinfo.value.code == 1


def test_missing_config_is_reported_not_raised(tmp_path, capsys):
    assert main(["run", "--config", str(tmp_path / "no.yaml"),
                 "--n", "16", "--out", str(tmp_path)]) == 1
    assert "error:" in capsys.readouterr().err


def test_unstable_march_exits_two(tmp_path, capsys):
    path = tmp_path / "exp.yaml"
    save_config(small_config(**{"lambda": 2.0}), path)
    assert main(["run", "--config", str(path), "--n", "16",
                 "--out", str(tmp_path / "out")]) == 2
    assert "error:" in capsys.readouterr().err


# }}}


def test_console_script_entry_point(tmp_path):
    exe = shutil.which("discflux")
    assert exe is not None
    proc = subprocess.run(
        [exe, "run", "--preset", "experiment1", "--n", "16",
         "--out", str(tmp_path)],
        capture_output=True, text=True,
    )
    assert proc.returncode == 0
    assert (tmp_path / "meta.json").exists()
