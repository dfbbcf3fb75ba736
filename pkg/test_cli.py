import json

from conftest import small_experiment
from sdcabench.cli import main
from sdcabench.crud.dataset import load_libsvm


def _write_config(tmp_path, raw=None):
    path = tmp_path / "config.json"
    path.write_text(json.dumps(raw or small_experiment()))
    return path


def test_presets_listing(capsys):
    assert main(["presets"]) == 0
    out = capsys.readouterr().out
    assert "lasso-desk" in out
    assert "rcv1-logistic (needs --dataset)" in out


def test_run_and_plot(tmp_path, capsys):
    config = _write_config(tmp_path)
    out_dir = tmp_path / "run"
    assert main(["run", "--config", str(config), "--out", str(out_dir), "--seed", "3", "--epochs", "5"]) == 0
    printed = capsys.readouterr().out
    assert "sdca\tseed=3\tok" in printed
    assert (out_dir / "sdca_seed3.csv").exists()
    assert not (out_dir / "sdca_seed0.csv").exists()

    svg = tmp_path / "plot.svg"
    assert main(["plot", "--run-dir", str(out_dir), "--out", str(svg), "--title", "small"]) == 0
    assert svg.read_text().lstrip().startswith("<?xml")


def test_rerun(tmp_path):
    config = _write_config(tmp_path)
    assert main(["run", "--config", str(config), "--out", str(tmp_path / "a")]) == 0
    assert main(["run", "--rerun", str(tmp_path / "a" / "manifest.json"), "--out", str(tmp_path / "b")]) == 0
    assert (tmp_path / "b" / "prox_gd_seed1.csv").exists()


def test_tune(tmp_path, capsys):
    config = _write_config(tmp_path)
    assert main(["tune", "--config", str(config), "--solver", "prox_gd"]) == 0
    assert float(capsys.readouterr().out.strip()) > 0


def test_gen(tmp_path, capsys):
    spec = tmp_path / "synth.json"
    spec.write_text(json.dumps({"family": "lasso", "n": 15, "p": 6, "s": 2}))
    target = tmp_path / "data.libsvm.gz"
    assert main(["gen", "--config", str(spec), "--seed", "4", "--out", str(target)]) == 0
    summary = json.loads(capsys.readouterr().out)
    assert summary["n"] == 15 and summary["w_star_nnz"] == 2
    assert load_libsvm(target).n == 15


def test_usage_errors_exit_with_two(tmp_path, capsys):
    bad = _write_config(tmp_path, {**small_experiment(), "solvers": []})
    assert main(["run", "--config", str(bad)]) == 2
    assert main(["run"]) == 2
    assert main(["run", "--preset", "rcv1-logistic"]) == 2
    assert main(["tune", "--preset", "lasso-desk", "--solver", "rda"]) == 2
    assert "error:" in capsys.readouterr().err


def test_schema(capsys):
    assert main(["schema"]) == 0
    schema = json.loads(capsys.readouterr().out)
    assert {"problem", "solvers", "epochs", "seeds"} <= set(schema["properties"])
    assert "problem" in schema["required"]
