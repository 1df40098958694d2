"""End-to-end command-line runs in temp directories.

Every documented CLI example is executed here too (see
test_readme_examples_run), so the README can't drift from the tool.
"""

import csv
import json
import os
import re
import subprocess
import sys
from pathlib import Path

import pytest

from torustwist import __version__
from torustwist.cli import main

REPO_ROOT = Path(__file__).resolve().parent.parent


def run_cli(args):
    return main(list(args))


@pytest.fixture
def outdir(tmp_path):
    return tmp_path / "out"


def _config(tmp_path, text, name="run.toml"):
    p = tmp_path / name
    p.write_text(text)
    return str(p)


STANDARD_K1 = '[family]\nname = "standard"\nk = 1.0\n'


def test_map_check_envelope(tmp_path, outdir, capsys):
    cfg = _config(tmp_path, STANDARD_K1)
    assert run_cli(["map-check", "--config", cfg, "--out", str(outdir)]) == 0
    env = json.loads((outdir / "map_check.json").read_text())
    assert env["artifact_version"] == __version__
    assert env["command"] == "map-check"
    assert env["config"]["family"] == {"name": "standard", "k": 1.0}
    assert env["payload"]["structure_ok"]
    assert env["payload"]["min_twist"] == pytest.approx(1.0, abs=1e-9)
    assert abs(env["payload"]["exactness_flux"]) < 1e-8
    assert env["wall_time"] >= 0.0
    out = capsys.readouterr().out
    assert "twist" in out.lower()


def test_envelope_roundtrips_to_identical_json(tmp_path, outdir):
    cfg = _config(tmp_path, STANDARD_K1)
    run_cli(["map-check", "--config", cfg, "--out", str(outdir)])
    raw = (outdir / "map_check.json").read_text()
    assert json.dumps(json.loads(raw), indent=2) == raw.rstrip("\n")


def test_flags_accepted_on_either_side_of_subcommand(tmp_path, tmp_path_factory):
    cfg = _config(tmp_path, STANDARD_K1)
    a = tmp_path / "a"
    b = tmp_path / "b"
    assert run_cli(["--config", cfg, "--out", str(a), "map-check"]) == 0
    assert run_cli(["map-check", "--config", cfg, "--out", str(b)]) == 0
    assert (a / "map_check.json").exists()
    assert (b / "map_check.json").exists()


def test_missing_config_file_is_a_config_error(tmp_path, capsys):
    assert run_cli(["map-check", "--config", str(tmp_path / "nope.toml")]) == 2
    assert "config error" in capsys.readouterr().err


def test_bad_value_type_is_a_config_error(tmp_path, capsys):
    cfg = _config(tmp_path, '[family]\nname = "standard"\nk = "ten"\n')
    assert run_cli(["map-check", "--config", cfg]) == 2
    assert "config error" in capsys.readouterr().err


def test_folding_loop_is_a_numerical_failure(tmp_path, outdir, capsys):
    # at k = 10 the image of the zero section is not a graph, and the
    # exactness check is contracted to fail loudly rather than average it
    cfg = _config(tmp_path, '[family]\nname = "standard"\nk = 10.0\n')
    assert run_cli(["map-check", "--config", cfg, "--out", str(outdir)]) == 3
    assert "numerical failure" in capsys.readouterr().err


def test_orbit_not_found_exit_code(tmp_path, outdir, capsys):
    text = STANDARD_K1 + "[orbit]\nn = 1\nk = 1\n"
    cfg = _config(tmp_path, text)
    rc = run_cli(["orbit", "vertical", "--config", cfg, "--out", str(outdir)])
    assert rc == 4
    assert "no vertical orbit" in capsys.readouterr().err.lower()


def test_orbit_vertical_records(tmp_path, outdir):
    text = '[family]\nname = "standard"\nk = 10.0\n[orbit]\nn = 1\nk = 1\n'
    cfg = _config(tmp_path, text)
    assert run_cli(["orbit", "vertical", "--config", cfg,
                    "--out", str(outdir)]) == 0
    env = json.loads((outdir / "orbit_vertical.json").read_text())
    recs = env["payload"]["records"]
    assert len(recs) == 2
    for rec in recs:
        assert rec["kind"] == "Vertical"
        assert rec["rho_v"] == "1/1"
        assert rec["residual"] < 1e-10


def test_rotation_csv_matches_action_at_zero_coupling(tmp_path, outdir):
    values = [i / 10 for i in range(10)]
    text = ('[family]\nname = "standard"\nk = 0.0\n'
            "[rotation]\nhorizon = 2000\nwindow = 200\n"
            f"phi_values = [0.0]\ni_values = {values}\n")
    cfg = _config(tmp_path, text)
    assert run_cli(["rotation", "--config", cfg, "--out", str(outdir)]) == 0
    with open(outdir / "rotation.csv") as fh:
        rows = list(csv.DictReader(fh))
    assert len(rows) == 10
    for row, i_val in zip(rows, values):
        assert row["case"] == "BoundedHorizontal"
        assert float(row["seed_i"]) == i_val
        # integrable rotation: the angle advances by the action each step
        assert abs(float(row["horizontal"]) - i_val) < 5e-16
        assert float(row["vertical"]) == 0.0


def test_levelset_csv_and_cache(tmp_path, outdir):
    text = STANDARD_K1 + "[levelset]\np = 0\nq = 1\nn_phi = 128\n"
    cfg = _config(tmp_path, text)
    assert run_cli(["levelset", "--config", cfg, "--out", str(outdir)]) == 0
    first = json.loads((outdir / "levelset.json").read_text())
    assert first["payload"]["cache_hit"] is False
    assert first["payload"]["exchange_residual"] < 1e-8
    with open(outdir / "levelset.csv") as fh:
        rows = list(csv.DictReader(fh))
    assert len(rows) == 128
    assert (outdir / "cache").is_dir()

    assert run_cli(["levelset", "--config", cfg, "--out", str(outdir)]) == 0
    second = json.loads((outdir / "levelset.json").read_text())
    assert second["payload"]["cache_hit"] is True


def test_ric_exit_zero_on_both_verdicts(tmp_path, outdir):
    yes = _config(tmp_path, '[family]\nname = "standard"\nk = 10.0\n'
                  "[ric]\nn_max = 2\nhorizon = 2000\nn_seeds = 16\n", "a.toml")
    assert run_cli(["ric", "--config", yes, "--out", str(outdir),
                    "--seed", "3"]) == 0
    env = json.loads((outdir / "ric.json").read_text())
    assert env["payload"]["verdict"] == "NoRicWitnessed"

    no = _config(tmp_path, '[family]\nname = "standard"\nk = 0.5\n'
                 "[ric]\nn_max = 1\nhorizon = 1000\nn_seeds = 8\n", "b.toml")
    assert run_cli(["ric", "--config", no, "--out", str(outdir),
                    "--seed", "3"]) == 0
    env = json.loads((outdir / "ric.json").read_text())
    assert env["payload"]["verdict"] == "Inconclusive"


def test_scan_rejects_other_families(tmp_path, capsys):
    text = STANDARD_K1 + "[scan]\ngammas = [2.0]\nalphas = [1.5]\n"
    cfg = _config(tmp_path, text)
    assert run_cli(["scan", "--config", cfg, "--seed", "1"]) == 2
    assert "saddle_center" in capsys.readouterr().err


def test_scan_rejects_empty_grid(tmp_path, capsys):
    text = ('[family]\nname = "saddle_center"\ngamma = 2.0\nalpha = 2.0\n'
            "[scan]\ngammas = []\nalphas = [1.5]\n")
    cfg = _config(tmp_path, text)
    assert run_cli(["scan", "--config", cfg, "--seed", "1"]) == 2
    assert "nonempty" in capsys.readouterr().err


def test_worker_count_does_not_change_csv_bytes(tmp_path):
    text = ('[family]\nname = "saddle_center"\ngamma = 2.0\nalpha = 2.0\n'
            "[scan]\ngammas = [2.0, 3.0]\nalphas = [1.2, 2.5]\n"
            "n_seeds = 8\nhorizon = 500\nwindow = 50\n")
    cfg = _config(tmp_path, text)
    digests = set()
    for workers in (1, 4):
        out = tmp_path / f"w{workers}"
        assert run_cli(["scan", "--config", cfg, "--out", str(out),
                        "--seed", "42", "--workers", str(workers)]) == 0
        digests.add((out / "scan.csv").read_bytes())
    assert len(digests) == 1


def _fenced(markdown: str, lang: str):
    return re.findall(r"```%s\n(.*?)```" % lang, markdown, flags=re.S)


def test_readme_examples_run(tmp_path):
    readme = (REPO_ROOT / "README.md").read_text()
    bash_blocks = _fenced(readme, "bash")
    python_blocks = _fenced(readme, "python")
    assert bash_blocks and python_blocks, "README must carry runnable examples"
    env = dict(os.environ,
               REPO_ROOT=str(REPO_ROOT),
               PATH=os.pathsep.join([os.path.dirname(sys.executable),
                                     os.environ.get("PATH", "")]))
    for block in bash_blocks:
        proc = subprocess.run(["bash", "-euo", "pipefail", "-c", block],
                              cwd=tmp_path, env=env, capture_output=True,
                              text=True, timeout=600)
        assert proc.returncode == 0, (
            f"README example failed:\n{block}\n--- stderr ---\n{proc.stderr}")
    for block in python_blocks:
        proc = subprocess.run([sys.executable, "-c", block],
                              cwd=tmp_path, env=env, capture_output=True,
                              text=True, timeout=600)
        assert proc.returncode == 0, (
            f"README example failed:\n{block}\n--- stderr ---\n{proc.stderr}")
