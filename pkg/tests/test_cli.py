"""End-to-end command-line behavior: pipelines, exit codes, and printed
contracts. Everything drives ``main()`` in process except one real
interpreter smoke test."""

import re
import subprocess
import sys

import numpy as np
import pytest

from ganrx.cli import main
from ganrx.hsi import HsiCube, Mask, load_cube, save_cube, save_mask
from ganrx.nn.layers import Tanh


def run_cli(*argv):
    return main(list(argv))


def tiny_synth_args(tmp_path, prefix="scene"):
    out = str(tmp_path / prefix)
    return ["synth", "--width", "10", "--height", "8", "--bands", "16",
            "--endmembers", "2", "--block", "2",
            "--abundances", "0.6,1.0", "--seed", "4", "--out", out], out


# ---------------------------------------------------------------------------
# synth

def test_synth_writes_cube_and_mask(tmp_path, capsys):
    argv, out = tiny_synth_args(tmp_path)
    assert run_cli(*argv) == 0
    stdout = capsys.readouterr().out
    assert f"wrote {out}.hsc (10x8x16)" in stdout
    assert "anomaly_pixels=8" in stdout  # two 2x2 blocks
    cube = load_cube(out + ".hsc")
    assert (cube.width, cube.height, cube.bands) == (10, 8, 16)


def test_synth_is_deterministic(tmp_path):
    argv1, out1 = tiny_synth_args(tmp_path, "a")
    argv2, out2 = tiny_synth_args(tmp_path, "b")
    run_cli(*argv1)
    run_cli(*argv2)
    assert (tmp_path / "a.hsc").read_bytes() == (tmp_path / "b.hsc").read_bytes()
    assert (tmp_path / "a_mask.pgm").read_bytes() == (tmp_path / "b_mask.pgm").read_bytes()


def test_synth_rejects_zero_bands(tmp_path, capsys):
    code = run_cli("synth", "--bands", "0", "--out", str(tmp_path / "x"))
    assert code == 2
    assert "--bands" in capsys.readouterr().err


def test_synth_rejects_overfull_diagonal(tmp_path, capsys):
    code = run_cli("synth", "--width", "6", "--height", "6", "--bands", "16",
                   "--block", "4", "--abundances", "0.5,1.0",
                   "--out", str(tmp_path / "x"))
    assert code == 1  # placement is a data problem, not a flag problem
    assert "diagonal" in capsys.readouterr().err


# ---------------------------------------------------------------------------
# config files

def test_config_file_and_flag_precedence(tmp_path, capsys):
    cfg = tmp_path / "scene.cfg"
    cfg.write_text("# comment line\nbands=12\nwidth=10\nheight=8\n"
                   "endmembers=2\nblock=2\nabundances=0.6,1.0\n")
    out = str(tmp_path / "s")
    assert run_cli("synth", "--config", str(cfg), "--bands", "16",
                   "--seed", "1", "--out", out) == 0
    assert "(10x8x16)" in capsys.readouterr().out  # flag beats file


def test_config_unknown_key(tmp_path, capsys):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("bandz=12\n")
    code = run_cli("synth", "--config", str(cfg), "--out", str(tmp_path / "x"))
    assert code == 2
    err = capsys.readouterr().err
    assert "bandz" in err and "bad.cfg:1" in err


def test_config_duplicate_key(tmp_path, capsys):
    cfg = tmp_path / "dup.cfg"
    cfg.write_text("bands=12\nbands=14\n")
    assert run_cli("synth", "--config", str(cfg),
                   "--out", str(tmp_path / "x")) == 2
    assert "dup.cfg:2" in capsys.readouterr().err


def test_config_bad_value(tmp_path, capsys):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("noise_sigma=loud\n")
    assert run_cli("synth", "--config", str(cfg),
                   "--out", str(tmp_path / "x")) == 2
    assert "noise_sigma" in capsys.readouterr().err


def test_config_missing_file(tmp_path, capsys):
    code = run_cli("synth", "--config", str(tmp_path / "nope.cfg"),
                   "--out", str(tmp_path / "x"))
    assert code == 1
    assert "nope.cfg" in capsys.readouterr().err


# ---------------------------------------------------------------------------
# train / detect / eval pipeline

@pytest.fixture(scope="module")
def scene(tmp_path_factory):
    tmp = tmp_path_factory.mktemp("scene")
    argv, out = tiny_synth_args(tmp)
    assert main(argv) == 0
    return out


def test_full_gan_pipeline(scene, tmp_path, capsys):
    model = str(tmp_path / "g.nn")
    assert run_cli("train", "--cube", scene + ".hsc", "--seed", "7",
                   "--epochs", "2", "--batch-size", "16",
                   "--model-out", model) == 0
    stdout = capsys.readouterr().out
    assert f"wrote {model}" in stdout
    assert re.search(r"final_epoch=1 l1=[\d.e-]+ total=", stdout)
    assert (tmp_path / "g_metrics.csv").read_text().startswith(
        "epoch,d_loss,g_adv,l1,total\n")

    out = str(tmp_path / "scores")
    assert run_cli("detect", "--method", "gan-rx", "--cube", scene + ".hsc",
                   "--model", model, "--ridge", "1e-6", "--out", out) == 0
    assert "max_score=" in capsys.readouterr().out

    assert run_cli("eval", "--scores", out + ".hsc",
                   "--mask", scene + "_mask.pgm",
                   "--roc-out", str(tmp_path / "roc.csv")) == 0
    stdout = capsys.readouterr().out
    assert re.search(r"auc=0\.\d{6}\n", stdout) or "auc=1.000000" in stdout
    assert (tmp_path / "roc.csv").read_text().startswith("threshold,fpr,tpr\n")


def test_autoencoder_pipeline(scene, tmp_path, capsys):
    model = str(tmp_path / "ae.nn")
    assert run_cli("train", "--ae", "--cube", scene + ".hsc", "--seed", "3",
                   "--epochs", "1", "--batch-size", "16",
                   "--metrics-out", str(tmp_path / "m.csv"),
                   "--model-out", model) == 0
    assert (tmp_path / "m.csv").exists()
    capsys.readouterr()
    assert run_cli("detect", "--method", "ae", "--cube", scene + ".hsc",
                   "--model", model, "--out", str(tmp_path / "s")) == 0


def test_train_draws_and_prints_seed(scene, tmp_path, capsys):
    assert run_cli("train", "--ae", "--cube", scene + ".hsc", "--epochs", "1",
                   "--batch-size", "16",
                   "--model-out", str(tmp_path / "g.nn")) == 0
    assert re.search(r"seed=\d+ \(drawn\)", capsys.readouterr().out)


def test_train_missing_cube(tmp_path, capsys):
    code = run_cli("train", "--cube", str(tmp_path / "ghost.hsc"),
                   "--model-out", str(tmp_path / "g.nn"))
    assert code == 1
    assert "ghost.hsc" in capsys.readouterr().err


def test_detect_rx_and_wrx(scene, tmp_path, capsys):
    for method in ("rx", "wrx"):
        out = str(tmp_path / method)
        assert run_cli("detect", "--method", method, "--cube", scene + ".hsc",
                       "--ridge", "1e-6", "--out", out) == 0
        assert load_cube(out + ".hsc").bands == 1
    capsys.readouterr()


def test_detect_unknown_method(scene, tmp_path, capsys):
    with pytest.raises(SystemExit) as exc:
        run_cli("detect", "--method", "sobel", "--cube", scene + ".hsc",
                "--out", str(tmp_path / "x"))
    assert exc.value.code == 2
    assert "gan-rx" in capsys.readouterr().err  # choices are listed


def test_detect_learned_method_needs_model(scene, tmp_path, capsys):
    code = run_cli("detect", "--method", "gan-rx", "--cube", scene + ".hsc",
                   "--out", str(tmp_path / "x"))
    assert code == 2
    assert "--model" in capsys.readouterr().err


def test_eval_perfect_scores(tmp_path, capsys):
    labels = np.array([[1, 0, 0, 1]], dtype=np.uint8)
    scores = np.array([[9.0, 1.0, 2.0, 8.0]], dtype=np.float32)
    save_cube(HsiCube(4, 1, 1, scores[None]), tmp_path / "s.hsc")
    save_mask(Mask(4, 1, labels), tmp_path / "m.pgm")
    assert run_cli("eval", "--scores", str(tmp_path / "s.hsc"),
                   "--mask", str(tmp_path / "m.pgm")) == 0
    assert "auc=1.000000" in capsys.readouterr().out


def test_eval_rejects_multiband_scores(tmp_path, capsys):
    cube = HsiCube(2, 2, 3, np.zeros((3, 2, 2), dtype=np.float32))
    save_cube(cube, tmp_path / "multi.hsc")
    save_mask(Mask(2, 2, np.eye(2, dtype=np.uint8)), tmp_path / "m.pgm")
    code = run_cli("eval", "--scores", str(tmp_path / "multi.hsc"),
                   "--mask", str(tmp_path / "m.pgm"))
    assert code == 2
    assert "single-band" in capsys.readouterr().err


def test_eval_rejects_mismatched_mask(tmp_path, capsys):
    save_cube(HsiCube(4, 1, 1, np.zeros((1, 1, 4), dtype=np.float32)),
              tmp_path / "s.hsc")
    save_mask(Mask(3, 1, np.array([[1, 0, 1]], dtype=np.uint8)),
              tmp_path / "m.pgm")
    code = run_cli("eval", "--scores", str(tmp_path / "s.hsc"),
                   "--mask", str(tmp_path / "m.pgm"))
    assert code == 2
    assert "3x1" in capsys.readouterr().err


# ---------------------------------------------------------------------------
# run

def test_run_benchmark_writes_report_and_figures(tmp_path, capsys):
    cfg = tmp_path / "bench.cfg"
    cfg.write_text("width=12\nheight=12\nbands=16\nendmembers=2\nblock=2\n"
                   "abundances=0.6,1.0\nbatch_size=32\nepochs=1\n")
    out_dir = tmp_path / "results"
    assert run_cli("run", "--config", str(cfg), "--runs", "2",
                   "--methods", "rx,gan-rx", "--out-dir", str(out_dir)) == 0
    stdout = capsys.readouterr().out
    assert re.search(r"rx: mean_auc=0\.\d{6} std_auc=0\.000000 runs=1", stdout)
    assert re.search(r"gan-rx: mean_auc=\d\.\d{6} std_auc=\d\.\d{6} runs=2",
                     stdout)

    report = (out_dir / "report.csv").read_text().splitlines()
    assert report[0] == "method,mean_auc,std_auc,runs"
    assert len(report) == 3
    assert (out_dir / "roc_rx.csv").exists()
    assert (out_dir / "roc_gan-rx.csv").exists()
    for fig in ("roc.png", "auc.png"):
        assert (out_dir / fig).read_bytes()[:8] == b"\x89PNG\r\n\x1a\n"


def test_run_rejects_unknown_method(tmp_path, capsys):
    assert run_cli("run", "--methods", "rx,sobel",
                   "--out-dir", str(tmp_path)) == 2
    err = capsys.readouterr().err
    assert "sobel" in err and "gan-rx" in err


def test_run_rejects_zero_runs(tmp_path, capsys):
    assert run_cli("run", "--runs", "0", "--out-dir", str(tmp_path)) == 2
    assert "--runs" in capsys.readouterr().err


# ---------------------------------------------------------------------------
# gradcheck

def test_gradcheck_passes(capsys):
    assert run_cli("gradcheck", "--cases", "2", "--seed", "5") == 0
    lines = capsys.readouterr().out.strip().splitlines()
    assert len(lines) == 11
    assert all(" PASS " in line for line in lines)
    assert any(line.startswith("conv1d") for line in lines)


def test_gradcheck_reports_broken_backward(monkeypatch, capsys):
    monkeypatch.setattr(Tanh, "backward",
                        lambda self, gy, param_grads=True: gy)
    assert run_cli("gradcheck", "--cases", "1", "--seed", "5") == 1
    out = capsys.readouterr().out
    assert re.search(r"tanh\s+FAIL", out)


# ---------------------------------------------------------------------------
# interpreter entry point

def test_module_entry_point(tmp_path):
    proc = subprocess.run(
        [sys.executable, "-m", "ganrx", "synth", "--width", "8",
         "--height", "8", "--bands", "8", "--endmembers", "2",
         "--block", "2", "--abundances", "1.0",
         "--out", str(tmp_path / "s")],
        capture_output=True, text=True)
    assert proc.returncode == 0
    assert "anomaly_pixels=4" in proc.stdout


def test_help_exits_zero(capsys):
    with pytest.raises(SystemExit) as exc:
        run_cli("--help")
    assert exc.value.code == 0
    assert "synth" in capsys.readouterr().out
