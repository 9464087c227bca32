import subprocess
import sys

import pytest

from plotkit.cli import main


def test_field_subcommand(field_csv, tmp_path, capsys):
    out = tmp_path / "field.png"
    assert main(["field", str(field_csv), "-o", str(out)]) == 0
    assert out.exists()
    captured = capsys.readouterr()
    assert "2598 arrows" in captured.out
    assert "3 undefined cells" in captured.out


def test_field_with_contour_flag(field_csv, tmp_path):
    out = tmp_path / "contour.png"
    assert main(["field", str(field_csv), "-o", str(out),
                 "--delta-contour"]) == 0
    assert out.exists()


def test_traj_subcommand_with_summary(violation_run, tmp_path, capsys):
    files, summary_path = violation_run
    out = tmp_path / "paths.png"
    argv = ["traj", *map(str, files), "-o", str(out),
            "--summary", str(summary_path)]
    assert main(argv) == 0
    assert out.exists()
    assert "1 violation span" in capsys.readouterr().out


def test_traj_overlay_many(planar_run, tmp_path, capsys):
    files, summary_path = planar_run
    out = tmp_path / "overlay.png"
    argv = ["traj", *map(str, files), "-o", str(out),
            "--summary", str(summary_path)]
    assert main(argv) == 0
    assert "6 paths, 0 violation spans" in capsys.readouterr().out


def test_trace_subcommand(trace_csv, tmp_path):
    out = tmp_path / "trace.png"
    assert main(["trace", str(trace_csv), "-o", str(out)]) == 0
    assert out.exists()


def test_missing_input_exits_2(tmp_path, capsys):
    missing = tmp_path / "nope.csv"
    assert main(["field", str(missing), "-o", str(tmp_path / "x.png")]) == 2
    assert str(missing) in capsys.readouterr().err


def test_schema_mismatch_exits_2(tmp_path, capsys):
    bad = tmp_path / "bad.csv"
    bad.write_text("a,b\n1,2\n")
    assert main(["field", str(bad), "-o", str(tmp_path / "x.png")]) == 2
    assert "error:" in capsys.readouterr().err


def test_unknown_subcommand_exits_2():
    with pytest.raises(SystemExit) as exc:
        main(["render", "x.csv", "-o", "y.png"])
    assert exc.value.code == 2


def test_module_invocation(field_csv, tmp_path):
    out = tmp_path / "field.png"
    proc = subprocess.run(
        [sys.executable, "-m", "plotkit", "field", str(field_csv),
         "-o", str(out)],
        capture_output=True, text=True)
    assert proc.returncode == 0
    assert out.exists()
