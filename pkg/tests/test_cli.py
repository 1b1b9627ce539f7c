import json

import numpy as np

from helpers import separable_set
from rffp import io as rio
from rffp.cli import main
from rffp.signal import default_fleet
from dataclasses import asdict


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


def small_config(tmp_path, bursts=1, devices=9):
    cfg = {"fleet": {"bursts_per_device": bursts, "profiles": [asdict(p) for p in default_fleet()[:devices]]}}
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps(cfg))
    return path


def test_synth_counts_and_determinism(tmp_path, capsys):
    cfg = small_config(tmp_path)
    for d in ("a", "b"):
        assert run(capsys, "synth", "--config", cfg, "--out", tmp_path / d)[0] == 0
    files = sorted(p.name for p in (tmp_path / "a" / "corpus").glob("*.iq"))
    assert len(files) == 9
    manifest = json.loads((tmp_path / "a" / "corpus" / "manifest.json").read_text())
    assert manifest["devices"] == {str(i): 1 for i in range(9)} and manifest["seed"] == 42
    for name in files + ["manifest.json"]:
        assert (tmp_path / "a" / "corpus" / name).read_bytes() == (tmp_path / "b" / "corpus" / name).read_bytes()


def test_synth_default_count(tmp_path, capsys):
    code, out, _ = run(capsys, "synth", "--out", tmp_path)
    assert code == 0 and out.startswith("1080 bursts from 9 devices")
    manifest = json.loads((tmp_path / "corpus" / "manifest.json").read_text())
    assert manifest["devices"] == {str(i): 120 for i in range(9)} and len(manifest["files"]) == 1080


def test_extract_single_burst(tmp_path, capsys):
    cfg = small_config(tmp_path, bursts=1, devices=1)
    run(capsys, "synth", "--config", cfg, "--out", tmp_path)
    code, out, _ = run(capsys, "extract", "--config", cfg, "--out", tmp_path, "--window", 64)
    assert code == 0 and out.startswith("1x900")
    ds = rio.read_dataset(tmp_path / "dataset_clean.csv")
    assert ds.features.shape == (1, 900) and ds.labels.tolist() == [0]
    first = (tmp_path / "dataset_clean.csv").read_bytes()
    run(capsys, "extract", "--config", cfg, "--out", tmp_path, "--window", 64)
    assert (tmp_path / "dataset_clean.csv").read_bytes() == first


def test_extract_without_corpus_reports_json_error(tmp_path, capsys):
    code, _, err = run(capsys, "extract", "--out", tmp_path)
    assert code == 1
    assert json.loads(err)["error"] == "error" and "synth" in json.loads(err)["message"]


def test_import_roundtrip_and_errors(tmp_path, capsys):
    ds = separable_set(120)
    rio.write_dataset_csv(tmp_path / "ext.csv", ds)
    code, out, _ = run(capsys, "import", tmp_path / "ext.csv", "--out", tmp_path / "o")
    assert code == 0 and "1080 rows" in out and str([120] * 9) in out
    back = rio.read_rffd(tmp_path / "o" / "dataset_imported.rffd")
    np.testing.assert_allclose(back.features, ds.features, atol=1e-7)
    np.testing.assert_array_equal(back.labels, ds.labels)

    bad = tmp_path / "bad.csv"
    bad.write_text("label," + ",".join(f"f{i}" for i in range(899)) + "\n0" + ",0.5" * 899 + "\n")
    code, _, err = run(capsys, "import", bad, "--out", tmp_path / "o")
    assert code == 1 and json.loads(err)["error"] == "column-count"


def test_evaluate_filtered_and_report(tmp_path, capsys):
    cfg = small_config(tmp_path, bursts=4)
    run(capsys, "synth", "--config", cfg, "--out", tmp_path)
    code, out, _ = run(capsys, "evaluate", "--config", cfg, "--out", tmp_path, "--models", "cnn-bigru",
                       "--snr", "10", "--folds", 2, "--max-epochs", 1)
    assert code == 0 and "99.17" in out
    rows = (tmp_path / "report.csv").read_text().splitlines()
    assert rows[0] == "model,snr_db,accuracy,precision,recall,f1"
    assert len(rows) == 2 and rows[1].startswith("CNN-BiGRU,10,")
    report = json.loads((tmp_path / "report.json").read_text())
    assert len(report["results"][0]["folds"]) == 2
    assert (tmp_path / "dataset_snr10.rffd").exists() and (tmp_path / "bars.csv").exists()
    code, out, _ = run(capsys, "report", "--out", tmp_path)
    assert code == 0 and rows[1] in out


def test_evaluate_imported_dataset_is_clean_only(tmp_path, capsys):
    rio.write_rffd(tmp_path / "ds.rffd", separable_set(4))
    code, _, _ = run(capsys, "evaluate", "--out", tmp_path, "--dataset", tmp_path / "ds.rffd",
                     "--models", "cnn", "--folds", 2, "--max-epochs", 1)
    assert code == 0
    rows = (tmp_path / "report.csv").read_text().splitlines()
    assert len(rows) == 2 and rows[1].startswith("CNN,clean,")


def test_train_and_optimize_window(tmp_path, capsys):
    rio.write_rffd(tmp_path / "ds.rffd", separable_set(4))
    code, out, _ = run(capsys, "train", "--out", tmp_path, "--dataset", tmp_path / "ds.rffd",
                       "--model", "bigru", "--folds", 2, "--max-epochs", 2)
    assert code == 0 and "BiGRU" in out
    ckpt = rio.read_checkpoint(tmp_path / "model_bigru.ckpt")
    assert ckpt.param_count == ckpt.config.param_count
    assert len((tmp_path / "train_log_bigru.csv").read_text().splitlines()) <= 3

    cfg = small_config(tmp_path, bursts=2)
    run(capsys, "synth", "--config", cfg, "--out", tmp_path)
    code, out, _ = run(capsys, "optimize-window", "--config", cfg, "--out", tmp_path)
    assert code == 0 and "<- best" in out
    assert (tmp_path / "window_scores_clean.csv").read_text().startswith("window_size,score\n16,")


def test_grad_check_flag(capsys):
    code, out, _ = run(capsys, "evaluate", "--grad-check")
    assert code == 0
    lines = out.strip().splitlines()
    assert len(lines) == 4 and all(line.endswith("ok") for line in lines)


def test_print_config_and_bad_config(tmp_path, capsys):
    code, out, _ = run(capsys, "synth", "--print-config", "--seed", 7)
    cfg = json.loads(out)
    assert code == 0 and cfg["seed"] == 7 and cfg["fleet"]["bursts_per_device"] == 120
    (tmp_path / "bad.json").write_text(json.dumps({"fleet": {"bursts": 3}}))
    code, _, err = run(capsys, "synth", "--config", tmp_path / "bad.json")
    assert code == 1 and "bursts" in json.loads(err)["message"]
    (tmp_path / "neg.json").write_text(json.dumps({"transient": {"segment_len": 10**6}}))
    code, _, err = run(capsys, "synth", "--config", tmp_path / "neg.json")
    assert code == 1 and json.loads(err)["error"] == "parameter"
