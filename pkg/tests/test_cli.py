import csv
import subprocess
import sys

import numpy as np
import pytest

from hsad.cli import ALGORITHMS, main, resolve_threads
from hsad.core import HsiCube, ScoreMap
from hsad.errors import ParameterError
from hsad.raster_io import read_cube, score_map_to_cube, write_cube, write_mask_csv
from hsad.core import GroundTruthMask


@pytest.fixture(scope="module")
def scene(tmp_path_factory):
    root = tmp_path_factory.mktemp("scene")
    cube, mask = root / "scene.hsad", root / "mask.csv"
    assert main(["synth", "--height", "20", "--width", "20", "--bands", "12", "--anomalies", "6",
                 "--cube", str(cube), "--mask", str(mask)]) == 0
    return cube, mask


def test_synth_default_census(tmp_path, capsys):
    cube, mask = tmp_path / "c.hsad", tmp_path / "m.csv"
    assert main(["synth", "--cube", str(cube), "--mask", str(mask)]) == 0
    out = capsys.readouterr().out
    assert "60x60x50" in out and "anomalies 20" in out
    loaded = read_cube(cube.read_bytes())
    assert (loaded.height, loaded.width, loaded.bands) == (60, 60, 50)


def test_synth_repeatable_bytes(tmp_path):
    paths = []
    for tag in ("a", "b"):
        c, m = tmp_path / f"{tag}.hsad", tmp_path / f"{tag}.csv"
        main(["synth", "--seed", "3", "--height", "16", "--width", "16", "--anomalies", "4",
              "--cube", str(c), "--mask", str(m)])
        paths.append((c.read_bytes(), m.read_bytes()))
    assert paths[0] == paths[1]


def test_synth_empty_mask_reported(tmp_path, capsys):
    assert main(["synth", "--anomalies", "0", "--height", "10", "--width", "10",
                 "--cube", str(tmp_path / "c.hsad"), "--mask", str(tmp_path / "m.csv")]) == 0
    assert "empty mask" in capsys.readouterr().out


def test_synth_invalid_spec(tmp_path):
    assert main(["synth", "--anomalies", "500", "--cube", str(tmp_path / "c.hsad"),
                 "--mask", str(tmp_path / "m.csv")]) == 2


@pytest.mark.parametrize("algo", ALGORITHMS)
def test_detect_every_algorithm(scene, tmp_path, algo, capsys):
    out = tmp_path / f"{algo}.hsad"
    args = ["detect", "--algo", algo, "--threads", "2", str(scene[0]), str(out)]
    if algo in ("crd", "lrx", "pcaro-local"):
        args[3:3] = ["--win", "3", "5"]
    if algo == "pcaro-global":
        args[3:3] = ["--m", "6"]
    assert main(args) == 0
    text = capsys.readouterr().out
    assert text.startswith("seconds ")
    assert float(text.split()[1]) >= 0
    scores = read_cube(out.read_bytes())
    assert scores.bands == 1 and scores.shape == (20, 20)


def test_detect_ercrd_deterministic(scene, tmp_path):
    outs = []
    for i in range(2):
        out = tmp_path / f"e{i}.hsad"
        main(["detect", "--algo", "ercrd", "--r", "10", "--T", "20", "--lambda", "1e-6", "--seed", "7",
              str(scene[0]), str(out)])
        outs.append(out.read_bytes())
    assert outs[0] == outs[1]


def test_detect_window_validation(scene, tmp_path):
    out = str(tmp_path / "x.hsad")
    assert main(["detect", "--algo", "crd", "--win", "11", "15", "--threads", "1", str(scene[0]), out]) == 0
    assert main(["detect", "--algo", "crd", "--win", "15", "11", str(scene[0]), out]) == 2
    assert main(["detect", "--algo", "crd", "--win", "6", "9", str(scene[0]), out]) == 2


def test_detect_parameter_errors_before_io(tmp_path):
    # Invalid parameters are reported even when the input does not exist.
    missing = str(tmp_path / "nope.hsad")
    assert main(["detect", "--algo", "ercrd", "--T", "0", missing, str(tmp_path / "o.hsad")]) == 2
    assert main(["detect", "--algo", "rcrd", "--r", "0", missing, str(tmp_path / "o.hsad")]) == 2
    assert main(["detect", "--algo", "ercrd", "--lambda", "-1", missing, str(tmp_path / "o.hsad")]) == 2


def test_detect_missing_input_exit_code(tmp_path):
    code = main(["detect", "--algo", "grx", str(tmp_path / "nope.hsad"), str(tmp_path / "o.hsad")])
    assert code == 3


def test_detect_corrupt_input_exit_code(tmp_path):
    bad = tmp_path / "bad.hsad"
    bad.write_bytes(b"garbage!")
    assert main(["detect", "--algo", "grx", str(bad), str(tmp_path / "o.hsad")]) == 3


def test_detect_numerical_failure_exit_code(tmp_path):
    # A constant scene with lambda 0 makes the RCRD Gram matrix singular.
    cube = tmp_path / "zero.hsad"
    cube.write_bytes(write_cube(HsiCube(np.zeros((3, 4, 4)))))
    code = main(["detect", "--algo", "rcrd", "--r", "3", "--lambda", "0", str(cube), str(tmp_path / "o.hsad")])
    assert code == 4


def test_usage_errors_exit_2():
    with pytest.raises(SystemExit) as exc:
        main(["detect", "--algo", "nope", "a", "b"])
    assert exc.value.code == 2
    with pytest.raises(SystemExit) as exc:
        main([])
    assert exc.value.code == 2


def test_detect_pgm_and_figure(scene, tmp_path):
    pgm, fig = tmp_path / "m.pgm", tmp_path / "m.png"
    assert main(["detect", "--algo", "grx", "--pgm", str(pgm), "--figure", str(fig),
                 str(scene[0]), str(tmp_path / "g.hsad")]) == 0
    assert pgm.read_bytes().startswith(b"P5\n20 20\n65535\n")
    assert fig.stat().st_size > 0


def test_eval_perfect_and_constant(tmp_path, capsys):
    truth = np.zeros((4, 4), dtype=np.uint8)
    truth[1, 2] = truth[3, 0] = 1
    (tmp_path / "t.csv").write_text(write_mask_csv(GroundTruthMask(truth)))
    for name, scores, expected in (
        ("perfect", truth.astype(float), "AUC 1.0000"),
        ("constant", np.full((4, 4), 2.0), "AUC 0.5000"),
    ):
        path = tmp_path / f"{name}.hsad"
        path.write_bytes(write_cube(score_map_to_cube(ScoreMap(scores))))
        assert main(["eval", str(path), str(tmp_path / "t.csv")]) == 0
        assert capsys.readouterr().out.strip() == expected
        rows = list(csv.reader((tmp_path / f"{name}.roc.csv").open()))
        assert rows[0] == ["threshold", "far", "dp"]
        assert (tmp_path / f"{name}.sep.csv").exists()


def test_eval_figures_and_shape_mismatch(scene, tmp_path, capsys):
    scores = tmp_path / "g.hsad"
    main(["detect", "--algo", "grx", str(scene[0]), str(scores)])
    assert main(["eval", str(scores), str(scene[1]), "--figures", str(tmp_path / "figs"),
                 "--roc-csv", str(tmp_path / "r.csv"), "--sep-csv", str(tmp_path / "s.csv")]) == 0
    for suffix in ("roc", "separation", "map"):
        assert (tmp_path / "figs" / f"g.{suffix}.png").stat().st_size > 0
    assert (tmp_path / "r.csv").exists() and (tmp_path / "s.csv").exists()
    (tmp_path / "small.csv").write_text("0,1\n1,0\n")
    assert main(["eval", str(scores), str(tmp_path / "small.csv")]) == 2


def test_thread_resolution(monkeypatch):
    monkeypatch.delenv("HSAD_THREADS", raising=False)
    assert resolve_threads(None) >= 1
    monkeypatch.setenv("HSAD_THREADS", "3")
    assert resolve_threads(None) == 3
    assert resolve_threads(5) == 5
    monkeypatch.setenv("HSAD_THREADS", "zero")
    with pytest.raises(ParameterError):
        resolve_threads(None)
    with pytest.raises(ParameterError):
        resolve_threads(0)


def test_env_threads_same_output(scene, tmp_path, monkeypatch):
    outs = []
    for threads in ("1", "4"):
        monkeypatch.setenv("HSAD_THREADS", threads)
        out = tmp_path / f"l{threads}.hsad"
        main(["detect", "--algo", "crd", "--win", "1", "5", str(scene[0]), str(out)])
        outs.append(out.read_bytes())
    assert outs[0] == outs[1]


def test_bench_cli_csv_and_verdict(scene, tmp_path, capsys):
    out, fig = tmp_path / "b.csv", tmp_path / "b.png"
    assert main(["bench", "--suite", "scaling-r", "--input", str(scene[0]), "--out", str(out),
                 "--figure", str(fig)]) == 0
    rows = list(csv.reader(out.open()))
    assert rows[0] == ["param", "mean_s", "sd_s"]
    assert [int(r[0]) for r in rows[1:]] == list(range(1, 21))
    assert "scaling-r:" in capsys.readouterr().out
    assert fig.stat().st_size > 0
    assert main(["bench", "--suite", "scaling-r", "--repeats", "2"]) == 2


def test_module_entry_point(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "hsad", "--help"], capture_output=True, text=True)
    assert proc.returncode == 0
    assert "detect" in proc.stdout and "bench" in proc.stdout
