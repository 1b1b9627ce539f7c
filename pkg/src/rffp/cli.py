"""Command-line entry point: ``rffp <command> [options]``."""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

import numpy as np

from . import io as rio
from .config import load_config
from .errors import RFFPError, StageError
from .experiment import EvaluationReport, cross_validate, snr_sweep, stratified_kfold
from .nn import architecture_config, canonical_kind, train
from .nn.gradcheck import check_architecture
from .pipeline import extract, generate_bursts, transients
from .rng import derive_seed
from .signal import CLEAN
from .window_opt import sweep_windows

log = logging.getLogger("rffp")

GRAD_TOL = 1e-4


def snr_tag(snr):
    return "clean" if snr in (CLEAN, None) else f"snr{float(snr):g}"


def parse_snr(text):
    text = str(text).strip().lower()
    if text in ("clean", "inf", "none"):
        return CLEAN
    v = float(text)
    return int(v) if v.is_integer() else v


def _out(cfg):
    path = Path(cfg.output_dir)
    path.mkdir(parents=True, exist_ok=True)
    return path


def _write(path, text):
    path = Path(path)
    path.write_text(text)
    log.info("wrote %s", path)


def _dataset_files(out, tag, ds):
    _write(out / f"dataset_{tag}.csv", rio.dataset_csv_text(ds))
    (out / f"dataset_{tag}.rffd").write_bytes(rio.rffd_bytes(ds))


def _load_bursts(cfg):
    """Corpus from disk when present, else synthesized in memory."""
    manifest = Path(cfg.output_dir) / "corpus" / "manifest.json"
    if not manifest.exists():
        return generate_bursts(cfg)
    entries = json.loads(manifest.read_text())["files"]
    return [rio.read_iq(manifest.parent / e["file"]) for e in entries]


# -- commands ----------------------------------------------------------------

def cmd_synth(cfg, args):
    if args.bursts_per_device is not None:
        cfg.fleet.bursts_per_device = args.bursts_per_device
        cfg.validate()
    corpus = _out(cfg) / "corpus"
    corpus.mkdir(exist_ok=True)
    files = []
    for burst in generate_bursts(cfg):
        name = f"dev{burst.device_id}_burst{burst.burst_index:04d}.iq"
        try:
            rio.write_iq(corpus / name, burst)
        except OSError as exc:
            raise StageError("synth", str(corpus / name), exc) from exc
        files.append({"file": name, "device_id": burst.device_id, "burst_index": burst.burst_index})
    counts = {}
    for f in files:
        counts[str(f["device_id"])] = counts.get(str(f["device_id"]), 0) + 1
    manifest = {"seed": cfg.seed, "bursts_per_device": cfg.fleet.bursts_per_device,
                "sample_rate_hz": cfg.fleet.sample_rate_hz, "devices": counts, "files": files}
    _write(corpus / "manifest.json", json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    print(f"{len(files)} bursts from {len(counts)} devices -> {corpus}")
    return 0


def cmd_extract(cfg, args):
    manifest = Path(cfg.output_dir) / "corpus" / "manifest.json"
    if not manifest.exists():
        raise RFFPError(f"no corpus at {manifest.parent}; run `rffp synth` first")
    if args.window is not None:
        cfg.window_opt.enabled = False
        cfg.glct.window_size = args.window
        cfg.validate()
    snr = parse_snr(args.snr)
    ex = extract(_load_bursts(cfg), cfg, snr)
    out = _out(cfg)
    tag = snr_tag(snr)
    _dataset_files(out, tag, ex.dataset)
    info = {"snr_db": snr, "window_size": ex.window_size, "rows": len(ex.dataset),
            "window_scores": [[s.window_size, s.score] for s in ex.window_scores]}
    _write(out / f"extract_{tag}.json", json.dumps(info, indent=2, sort_keys=True) + "\n")
    print(f"{ex.dataset.features.shape[0]}x{ex.dataset.features.shape[1]} dataset "
          f"(GLCT window {ex.window_size}) -> {out / f'dataset_{tag}.csv'}")
    return 0


def cmd_import(cfg, args):
    ds = rio.read_dataset(args.path, args.format)
    out = _out(cfg)
    _dataset_files(out, "imported", ds)
    hist = ds.histogram().tolist()
    print(f"imported {len(ds)} rows; label histogram {hist}")
    return 0


def cmd_optimize_window(cfg, args):
    snr = parse_snr(args.snr)
    segs = transients(_load_bursts(cfg), cfg, snr)
    w = cfg.window_opt
    scores = sweep_windows(segs, w.candidates, w.smooth_k, w.stride)
    best = max(scores, key=lambda s: (s.score, -s.window_size))
    _write(_out(cfg) / f"window_scores_{snr_tag(snr)}.csv", rio.window_scores_csv(scores))
    for s in scores:
        print(f"w={s.window_size:<4d} score={s.score:.6f}{'  <- best' if s is best else ''}")
    return 0


def _dataset_for(cfg, args):
    path = getattr(args, "dataset", None) or cfg.dataset_path
    if path:
        return rio.read_dataset(path)
    out = Path(cfg.output_dir)
    for tag in ("imported", "clean"):
        if (out / f"dataset_{tag}.rffd").exists():
            return rio.read_rffd(out / f"dataset_{tag}.rffd")
    return extract(_load_bursts(cfg), cfg, CLEAN).dataset


def cmd_train(cfg, args):
    if args.folds is not None:
        cfg.evaluation.folds = args.folds
    if args.max_epochs is not None:
        cfg.evaluation.max_epochs = args.max_epochs
    cfg.validate()
    ds = _dataset_for(cfg, args)
    kind = canonical_kind(args.model)
    plan = stratified_kfold(ds.labels, cfg.evaluation.folds, cfg.seed)
    tr, va = plan.indices(args.fold)
    mcfg = architecture_config(kind, seed=derive_seed(cfg.seed, 3, args.fold),
                               **cfg.evaluation.model_overrides())
    model = train(mcfg, ds.subset(tr), ds.subset(va))
    acc = float(np.mean(model.predict(ds.features[va]) == ds.labels[va]))
    out = _out(cfg)
    slug = kind.lower()
    rio.write_checkpoint(out / f"model_{slug}.ckpt", model)
    _write(out / f"train_log_{slug}.csv", rio.train_log_csv(model.train_log))
    print(f"{kind}: {model.param_count} parameters, {len(model.train_log)} epochs, "
          f"best epoch {model.best_epoch}, held-out accuracy {100 * acc:.2f}%")
    return 0


def run_grad_checks(models):
    worst = 0.0
    for kind in models:
        err = check_architecture(kind)
        worst = max(worst, err)
        print(f"{kind:<10} max relative gradient error {err:.3e} {'ok' if err < GRAD_TOL else 'FAIL'}")
    return 0 if worst < GRAD_TOL else 1


def _write_report(out, report):
    _write(out / "report.json", report.to_json())
    _write(out / "report.csv", report.table_csv())
    _write(out / "bars.csv", report.bars_csv())
    _write(out / "comparison.txt", report.comparison_text())


def cmd_evaluate(cfg, args):
    ev = cfg.evaluation
    if args.models:
        ev.models = [canonical_kind(m) for m in args.models.split(",")]
    if args.snr:
        ev.snr_levels = [parse_snr(s) for s in args.snr.split(",")]
    if args.max_epochs is not None:
        ev.max_epochs = args.max_epochs
    if args.folds is not None:
        ev.folds = args.folds
    cfg.validate()
    if args.grad_check:
        return run_grad_checks(ev.models)

    out = _out(cfg)
    overrides = ev.model_overrides()
    path = args.dataset or cfg.dataset_path
    if path:
        # imported features are post-extraction: no signal-level noise injection
        ds = rio.read_dataset(path)
        report = EvaluationReport(meta={"seed": cfg.seed, "k": ev.folds, "dataset": str(path),
                                        "snr_levels": ["clean"], "models": ev.models})
        for kind in ev.models:
            report.results.append(cross_validate(kind, ds, ev.folds, cfg.seed, overrides=overrides))
    else:
        bursts = _load_bursts(cfg)

        def dataset_for_snr(snr):
            ex = extract(bursts, cfg, snr)
            _dataset_files(out, snr_tag(snr), ex.dataset)
            return ex.dataset

        report = snr_sweep(ev.models, ev.snr_levels, dataset_for_snr, cfg.seed, ev.folds, overrides=overrides)
    _write_report(out, report)
    print(report.comparison_text(), end="")
    return 0


def cmd_report(cfg, args):
    path = Path(args.report or Path(cfg.output_dir) / "report.json")
    data = json.loads(path.read_text())
    from .experiment import CVResult, Metrics

    report = EvaluationReport(meta=data.get("meta", {}))
    for r in data["results"]:
        folds = [Metrics(**f) for f in r["folds"]]
        report.results.append(CVResult(r["model"], r["snr_db"], r.get("seed", 0), r.get("config_fingerprint", ""),
                                       folds, np.array(r["confusion"]), r.get("epochs", [])))
    print(report.table_csv(), end="")
    print()
    print(report.comparison_text(), end="")
    _write(path.parent / "comparison.txt", report.comparison_text())
    return 0


COMMANDS = {
    "synth": cmd_synth,
    "extract": cmd_extract,
    "import": cmd_import,
    "optimize-window": cmd_optimize_window,
    "train": cmd_train,
    "evaluate": cmd_evaluate,
    "report": cmd_report,
}


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="pipeline config JSON (defaults apply to missing keys)")
    common.add_argument("--seed", type=int, default=None, help="run seed (default 42)")
    common.add_argument("--out", default=None, help="output directory")
    common.add_argument("--print-config", action="store_true", help="print the effective config and exit")
    common.add_argument("-v", "--verbose", action="count", default=0)

    p = argparse.ArgumentParser(prog="rffp", description="RF fingerprinting with GLCT features.")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("synth", parents=[common], help="simulate the emitter fleet to IQ files")
    s.add_argument("--bursts-per-device", type=int)

    s = sub.add_parser("extract", parents=[common], help="corpus -> 900-feature dataset")
    s.add_argument("--snr", default="clean", help="dB level or 'clean'")
    s.add_argument("--window", type=int, help="fixed GLCT window (skips window optimization)")

    s = sub.add_parser("import", parents=[common], help="import an external feature dataset")
    s.add_argument("path")
    s.add_argument("--format", choices=["csv", "rffd"], default=None)

    s = sub.add_parser("optimize-window", parents=[common], help="score GLCT window sizes")
    s.add_argument("--snr", default="clean")

    s = sub.add_parser("train", parents=[common], help="train one model on one fold")
    s.add_argument("--model", required=True)
    s.add_argument("--dataset")
    s.add_argument("--fold", type=int, default=0)
    s.add_argument("--folds", type=int)
    s.add_argument("--max-epochs", type=int)

    s = sub.add_parser("evaluate", parents=[common], help="cross-validated SNR sweep")
    s.add_argument("--models", help="comma-separated architectures")
    s.add_argument("--snr", help="comma-separated dB levels")
    s.add_argument("--dataset", help="evaluate an imported dataset (clean features only)")
    s.add_argument("--folds", type=int)
    s.add_argument("--max-epochs", type=int)
    s.add_argument("--grad-check", action="store_true", help="only run finite-difference gradient checks")

    s = sub.add_parser("report", parents=[common], help="print a saved report next to published values")
    s.add_argument("--report")
    return p


def _error_json(exc):
    info = {"error": getattr(exc, "kind", type(exc).__name__), "message": str(exc)}
    if isinstance(exc, StageError):
        info.update(stage=exc.stage, sample=exc.sample_id, cause=getattr(exc.cause, "kind", "error"))
    return json.dumps(info, sort_keys=True)


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.WARNING - 10 * min(args.verbose, 2),
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = load_config(args.config)
        if args.seed is not None:
            cfg.seed = args.seed
        if args.out is not None:
            cfg.output_dir = args.out
        cfg.validate()
        if args.print_config:
            print(cfg.to_json(), end="")
            return 0
        return COMMANDS[args.command](cfg, args)
    except (RFFPError, OSError, ValueError, KeyError) as exc:
        print(_error_json(exc), file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
