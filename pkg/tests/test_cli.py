"""End-to-end CLI checks through real subprocesses."""

from __future__ import annotations

import json
import shutil
import subprocess
import sys

import numpy as np
import pytest

from tomo.phantom import load_image


def run_cli(*argv, expect=0):
    proc = subprocess.run(
        [sys.executable, "-m", "tomo", *map(str, argv)],
        capture_output=True, text=True,
    )
    assert proc.returncode == expect, (
        f"exit {proc.returncode} != {expect}\nstdout: {proc.stdout}\n"
        f"stderr: {proc.stderr}"
    )
    return proc


@pytest.fixture(scope="module")
def workdir(tmp_path_factory):
    """A mesh/phantom/frame/matrix chain shared by the read-only tests."""
    root = tmp_path_factory.mktemp("cli")
    run_cli("mesh", "--rings", 8, "--electrodes", 8,
            "--out", root / "disc.tmsh")
    run_cli("phantom", "--seed", 3, "--out", root / "phantom.json")
    run_cli("phantom", "render", "--in", root / "phantom.json",
            "--out", root / "truth.png")
    run_cli("simulate", "--mesh", root / "disc.tmsh",
            "--sigma", root / "phantom.json", "--out", root / "frame.tfrm")
    run_cli("sensitivity", "--mesh", root / "disc.tmsh",
            "--out", root / "s.tsns")
    return root


@pytest.fixture(scope="module")
def corpus(tmp_path_factory):
    root = tmp_path_factory.mktemp("corpus")
    run_cli("dataset", "gen", "--count", 2, "--algos", "lbp,tikhonov",
            "--seed", 11, "--out-dir", root)
    return root


def test_reconstruct_each_algorithm(workdir):
    for algo in ("lbp", "landweber", "tikhonov"):
        out = workdir / f"recon_{algo}.png"
        run_cli("reconstruct", "--algo", algo, "--frame", workdir / "frame.tfrm",
                "--sens", workdir / "s.tsns", "--mesh", workdir / "disc.tmsh",
                "--out", out)
        img = load_image(out)
        assert img.shape == (256, 256)
        assert img.max() > 0.0


def test_eval_identical_pair(workdir):
    proc = run_cli("eval", "--pred", workdir / "truth.png",
                   "--truth", workdir / "truth.png")
    assert proc.stdout.strip() == "0,1,inf"


def test_eval_metric_subset_follows_order(workdir):
    proc = run_cli("eval", "--pred", workdir / "truth.png",
                   "--truth", workdir / "truth.png",
                   "--metrics", "psnr,rmse")
    assert proc.stdout.strip() == "inf,0"


def test_eval_rejects_unknown_metric(workdir):
    proc = run_cli("eval", "--pred", workdir / "truth.png",
                   "--truth", workdir / "truth.png",
                   "--metrics", "dice", expect=1)
    assert "tomo eval:" in proc.stderr


def test_corpus_layout(corpus):
    manifest_lines = (corpus / "manifest.jsonl").read_text().splitlines()
    assert len(manifest_lines) == 4  # 2 phantoms x 2 algorithms
    config = json.loads((corpus / "config.json").read_text())
    assert config["count"] == 2
    assert config["base_seed"] == 11
    assert config["algorithms"] == ["lbp", "tikhonov"]
    for i in range(2):
        assert (corpus / f"targets/{i}.png").exists()
        assert (corpus / f"inputs/{i}_lbp.png").exists()
        assert (corpus / f"inputs/{i}_tikhonov.png").exists()


def test_batch_eval_csv_shape(corpus):
    proc = run_cli("eval", "--manifest", corpus / "manifest.jsonl")
    lines = proc.stdout.strip().splitlines()
    assert lines[0] == "id,algorithm,rmse,ssim,psnr_db"
    assert len(lines) == 6  # header + 4 pairs + mean
    assert lines[-1].startswith("mean,,")
    for line in lines[1:-1]:
        fields = line.split(",")
        assert len(fields) == 5
        assert fields[1] in ("lbp", "tikhonov")


def test_batch_eval_algo_filter_and_out(corpus, tmp_path):
    out = tmp_path / "scores.csv"
    run_cli("eval", "--manifest", corpus / "manifest.jsonl",
            "--algo", "lbp", "--out", out)
    lines = out.read_text().strip().splitlines()
    assert len(lines) == 4  # header + 2 lbp rows + mean
    assert all(",lbp," in line for line in lines[1:-1])


def test_batch_eval_pred_dir_override(corpus, tmp_path):
    # Scoring the targets against themselves through --pred-dir must
    # produce perfect rows.
    stand_in = tmp_path / "preds"
    stand_in.mkdir()
    for i in range(2):
        shutil.copy(corpus / f"targets/{i}.png", stand_in / f"{i}_lbp.png")
    proc = run_cli("eval", "--manifest", corpus / "manifest.jsonl",
                   "--algo", "lbp", "--pred-dir", stand_in)
    data_rows = proc.stdout.strip().splitlines()[1:-1]
    for row in data_rows:
        assert row.endswith(",0,1,inf")


def test_compare_grid_dimensions(corpus, tmp_path):
    out = tmp_path / "grid.png"
    run_cli("compare", "--manifest", corpus / "manifest.jsonl",
            "--ids", "0,1", "--out", out)
    grid = load_image(out)
    assert grid.shape == (3 * 256, 2 * 256)  # truth + 2 algos, 2 ids


def test_compare_enhanced_row(corpus, tmp_path):
    enhanced = tmp_path / "enh"
    enhanced.mkdir()
    for i in range(2):
        shutil.copy(corpus / f"inputs/{i}_lbp.png", enhanced / f"{i}_lbp.png")
    out = tmp_path / "grid.png"
    run_cli("compare", "--manifest", corpus / "manifest.jsonl",
            "--ids", "0,1", "--algo", "lbp", "--enhanced", enhanced,
            "--out", out)
    assert load_image(out).shape == (3 * 256, 2 * 256)  # truth, lbp, enhanced
    proc = run_cli("compare", "--manifest", corpus / "manifest.jsonl",
                   "--ids", "0,1", "--enhanced", enhanced,
                   "--out", out, expect=1)
    assert "exactly one algorithm" in proc.stderr


def test_simulate_accepts_raw_sigma_array(workdir, tmp_path):
    field = tmp_path / "field.json"
    field.write_text(json.dumps([1.0] * 256))
    run_cli("simulate", "--mesh", workdir / "disc.tmsh", "--sigma", field,
            "--out", tmp_path / "uniform.tfrm")
    short = tmp_path / "short.json"
    short.write_text(json.dumps([1.0] * 10))
    proc = run_cli("simulate", "--mesh", workdir / "disc.tmsh",
                   "--sigma", short, "--out", tmp_path / "x.tfrm", expect=1)
    assert "tomo simulate:" in proc.stderr


def test_usage_errors_exit_two(workdir):
    run_cli("frobnicate", expect=2)
    run_cli("reconstruct", "--algo", "lbp", expect=2)  # missing required args
    run_cli("reconstruct", "--algo", "mystery", "--frame", "f", "--sens", "s",
            "--mesh", "m", "--out", "o", expect=2)


def test_runtime_errors_exit_one(tmp_path):
    proc = run_cli("simulate", "--mesh", tmp_path / "absent.tmsh",
                   "--sigma", tmp_path / "absent.json",
                   "--out", tmp_path / "x.tfrm", expect=1)
    assert proc.stderr.startswith("tomo simulate:")


def test_quiet_silences_diagnostics(tmp_path):
    noisy = run_cli("mesh", "--rings", 2, "--electrodes", 4,
                    "--out", tmp_path / "a.tmsh")
    assert "wrote" in noisy.stderr
    silent = run_cli("--quiet", "mesh", "--rings", 2, "--electrodes", 4,
                     "--out", tmp_path / "b.tmsh")
    assert silent.stderr == ""


def test_global_flags_accepted_on_both_sides(tmp_path):
    run_cli("--seed", 5, "phantom", "--out", tmp_path / "a.json")
    run_cli("phantom", "--seed", 5, "--out", tmp_path / "b.json")
    assert (tmp_path / "a.json").read_bytes() == (tmp_path / "b.json").read_bytes()
