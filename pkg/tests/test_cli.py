import json
import subprocess
import sys
import time

import pytest

from orthotopo.cli import EXIT_CONFIG, EXIT_NONCONVERGENCE, EXIT_OK, EXIT_USAGE, main


def test_smoke_run(tmp_path, capsys):
    t0 = time.perf_counter()
    code = main(["--case", "tube", "--material", "ortho", "--approach", "complementary",
                 "--ndiv", "4", "--out", str(tmp_path)])
    elapsed = time.perf_counter() - t0
    out = capsys.readouterr().out
    assert code == EXIT_OK
    assert "final compliance:" in out
    assert "converged in" in out and "iterations" in out
    assert (tmp_path / "tube_ortho_complementary.vtk").exists()
    assert (tmp_path / "tube_ortho_complementary.csv").exists()
    assert elapsed < 10.0


def test_compliance_printed_to_four_significant_figures(tmp_path, capsys):
    main(["--case", "torsion", "--material", "iso", "--approach", "direct", "--ndiv", "4", "--out", str(tmp_path)])
    line = [ln for ln in capsys.readouterr().out.splitlines() if ln.startswith("final compliance")][0]
    value = line.split(":")[1].split()[0]
    assert len(value.replace(".", "").lstrip("0")) <= 4


def test_unknown_case_is_usage_error(capsys):
    assert main(["--case", "bridge"]) == EXIT_USAGE
    assert "invalid choice" in capsys.readouterr().err


def test_config_file_and_errors(tmp_path, capsys):
    good = tmp_path / "run.json"
    good.write_text(json.dumps({"case": "tube", "n_div": 3, "max_iters": 2, "epsilon": 1e-12,
                                "export_every": 1, "geometry": {"crown_inner": 0.2, "crown_outer": 0.5}}))
    code = main(["--config", str(good), "--out", str(tmp_path / "o")])
    assert code == EXIT_NONCONVERGENCE
    assert (tmp_path / "o" / "tube_ortho_complementary_iter001.vtk").exists()
    assert "without convergence" in capsys.readouterr().out
    bad = tmp_path / "bad.json"
    bad.write_text('{"epsilon": -1}')
    assert main(["--config", str(bad)]) == EXIT_CONFIG
    assert "epsilon" in capsys.readouterr().err


def test_console_entry_point(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "orthotopo.cli", "--case", "nowhere"],
                          capture_output=True, text=True)
    assert proc.returncode != 0
