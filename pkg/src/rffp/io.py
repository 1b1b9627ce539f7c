"""On-disk formats: IQ bursts, datasets (CSV and RFFD), grids, checkpoints, logs."""

from __future__ import annotations

import csv
import io
import json
import struct
from pathlib import Path

import numpy as np

from .errors import ColumnCountError, ParseError, UnknownLabelError
from .features import N_FEATURES, LabeledDataset
from .signal import CLEAN, BurstRecord, IQSequence, N_DEVICES

RFFD_MAGIC = b"RFFD"
RFFD_VERSION = 1


def _dump_json(obj):
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


# -- IQ bursts ---------------------------------------------------------------

def write_iq(path, burst):
    """``<path>``: interleaved little-endian float32 I,Q; ``<path>.json``: sidecar."""
    path = Path(path)
    x = burst.signal.samples
    inter = np.empty(2 * x.size, dtype="<f4")
    inter[0::2] = x.real
    inter[1::2] = x.imag
    path.write_bytes(inter.tobytes())
    side = {"sample_rate_hz": burst.signal.sample_rate_hz, "device_id": burst.device_id,
            "burst_index": burst.burst_index, "snr_db": burst.snr_db}
    Path(str(path) + ".json").write_text(_dump_json(side))


def read_iq(path):
    path = Path(path)
    raw = np.frombuffer(path.read_bytes(), dtype="<f4")
    if raw.size % 2:
        raise ParseError(f"{path}: odd number of float32 values")
    side = json.loads(Path(str(path) + ".json").read_text())
    x = raw[0::2].astype(np.float64) + 1j * raw[1::2].astype(np.float64)
    snr = side.get("snr_db", CLEAN)
    return BurstRecord(IQSequence(x, side["sample_rate_hz"]), int(side["device_id"]),
                       int(side["burst_index"]), snr)


# -- datasets ----------------------------------------------------------------

def _fmt(v):
    return repr(float(np.float32(v)))


def dataset_csv_text(ds):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    nf = ds.features.shape[1]
    w.writerow(["label", *(f"f{i:03d}" for i in range(nf))])
    for row, label in zip(ds.features, ds.labels):
        w.writerow([int(label), *map(_fmt, row)])
    return buf.getvalue()


def write_dataset_csv(path, ds):
    Path(path).write_text(dataset_csv_text(ds))


def _label_map(raw):
    """Integer labels in [0, 8] pass through; otherwise up to nine distinct names are indexed in sorted order."""
    try:
        ints = [int(v) for v in raw]
    except ValueError:
        ints = None
    if ints is not None and all(str(i) == v.strip() for i, v in zip(ints, raw)):
        bad = sorted({i for i in ints if not 0 <= i < N_DEVICES})
        if bad:
            raise UnknownLabelError(f"labels {bad[:5]} outside [0, {N_DEVICES - 1}]")
        return np.array(ints), tuple(f"device_{i}" for i in range(N_DEVICES))
    names = sorted({v.strip() for v in raw})
    if len(names) > N_DEVICES:
        raise UnknownLabelError(f"{len(names)} distinct labels; at most {N_DEVICES} devices are supported")
    index = {n: i for i, n in enumerate(names)}
    padded = tuple(names) + tuple(f"device_{i}" for i in range(len(names), N_DEVICES))
    return np.array([index[v.strip()] for v in raw]), padded


def read_dataset_csv(path, n_features=N_FEATURES):
    """Parse ``label,f000,...``; the label column may be first or named ``label``."""
    path = Path(path)
    with path.open(newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise ParseError(f"{path}: empty file")
    header = [h.strip() for h in rows[0]]
    label_col = header.index("label") if "label" in header else 0
    if len(header) - 1 != n_features:
        raise ColumnCountError(f"{path}: expected {n_features} feature columns, found {len(header) - 1}")
    feats, labels = [], []
    for lineno, row in enumerate(rows[1:], start=2):
        if not row:
            continue
        if len(row) != len(header):
            raise ColumnCountError(f"{path}:{lineno}: {len(row)} fields, header has {len(header)}")
        labels.append(row[label_col])
        try:
            feats.append([float(v) for i, v in enumerate(row) if i != label_col])
        except ValueError as exc:
            raise ParseError(f"{path}:{lineno}: {exc}") from None
    if not feats:
        raise ParseError(f"{path}: no data rows")
    x = np.array(feats)
    if not np.all(np.isfinite(x)):
        raise ParseError(f"{path}: non-finite feature values")
    y, names = _label_map(labels)
    return LabeledDataset(x, y, names)


def rffd_bytes(ds):
    n, f = ds.features.shape
    head = RFFD_MAGIC + struct.pack("<HII", RFFD_VERSION, n, f)
    return head + ds.features.astype("<f4").tobytes() + ds.labels.astype("<u2").tobytes()


def write_rffd(path, ds):
    Path(path).write_bytes(rffd_bytes(ds))


def read_rffd(path):
    path = Path(path)
    data = path.read_bytes()
    if data[:4] != RFFD_MAGIC:
        raise ParseError(f"{path}: bad magic {data[:4]!r}")
    version, n, f = struct.unpack_from("<HII", data, 4)
    if version != RFFD_VERSION:
        raise ParseError(f"{path}: unsupported RFFD version {version}")
    if f != N_FEATURES:
        raise ColumnCountError(f"{path}: {f} features per row, expected {N_FEATURES}")
    off = 4 + struct.calcsize("<HII")
    need = off + 4 * n * f + 2 * n
    if len(data) != need:
        raise ParseError(f"{path}: {len(data)} bytes, expected {need}")
    x = np.frombuffer(data, dtype="<f4", count=n * f, offset=off).reshape(n, f).astype(np.float64)
    y = np.frombuffer(data, dtype="<u2", count=n, offset=off + 4 * n * f).astype(np.int64)
    if n and y.max() >= N_DEVICES:
        raise UnknownLabelError(f"{path}: label {int(y.max())} outside [0, {N_DEVICES - 1}]")
    return LabeledDataset(x, y)


def read_dataset(path, fmt=None):
    fmt = fmt or ("rffd" if str(path).endswith(".rffd") else "csv")
    if fmt == "csv":
        return read_dataset_csv(path)
    if fmt == "rffd":
        return read_rffd(path)
    raise ParseError(f"unknown dataset format {fmt!r}")


# -- time-frequency grids ----------------------------------------------------

def write_grid(path, grid, meta=None):
    """Magnitudes as CSV (frames x bins) plus an optional JSON metadata sidecar."""
    path = Path(path)
    np.savetxt(path, grid.magnitude, delimiter=",", fmt="%.9g")
    if meta is not None:
        info = {"frame_times_s": grid.frame_times_s.tolist(), "bin_freqs_hz": grid.bin_freqs_hz.tolist(), **meta}
        path.with_suffix(".json").write_text(_dump_json(info))


def window_scores_csv(scores):
    lines = ["window_size,score"] + [f"{s.window_size},{s.score:.12g}" for s in scores]
    return "\n".join(lines) + "\n"


# -- model checkpoints -------------------------------------------------------

def write_checkpoint(path, trained):
    """u32 header length, JSON header, then the float64 parameter blob (little-endian)."""
    header = json.dumps({"config": trained.config.to_dict(), "param_count": trained.param_count,
                         "seed": trained.config.seed, "best_epoch": trained.best_epoch},
                        sort_keys=True).encode()
    blob = np.asarray(trained.parameters, dtype="<f8").tobytes()
    Path(path).write_bytes(struct.pack("<I", len(header)) + header + blob)


def read_checkpoint(path):
    from .nn.model import ModelConfig
    from .nn.train import TrainedModel

    data = Path(path).read_bytes()
    (hlen,) = struct.unpack_from("<I", data)
    header = json.loads(data[4:4 + hlen])
    params = np.frombuffer(data, dtype="<f8", offset=4 + hlen).copy()
    if params.size != header["param_count"]:
        raise ParseError(f"{path}: {params.size} parameters, header says {header['param_count']}")
    cfg = ModelConfig.from_dict(header["config"])
    return TrainedModel(cfg, params, params.size, [], header.get("best_epoch"))


def train_log_csv(entries):
    lines = ["epoch,train_loss,val_loss,val_acc"]
    lines += [f"{e.epoch},{e.train_loss:.10g},{e.val_loss:.10g},{e.val_accuracy:.10g}" for e in entries]
    return "\n".join(lines) + "\n"
