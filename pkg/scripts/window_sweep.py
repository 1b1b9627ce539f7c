"""Window-size scores of the synthetic fleet's transients at several SNR levels."""

import sys

from rffp.config import PipelineConfig
from rffp.pipeline import generate_bursts, transients
from rffp.window_opt import sweep_windows


def main(levels=("clean", 30, 20, 10)):
    cfg = PipelineConfig()
    bursts = generate_bursts(cfg)
    w = cfg.window_opt
    print("snr     " + "".join(f"{c:>10d}" for c in w.candidates) + "    best")
    for snr in levels:
        scores = sweep_windows(transients(bursts, cfg, snr), w.candidates, w.smooth_k)
        best = max(scores, key=lambda s: (s.score, -s.window_size))
        print(f"{str(snr):<8}" + "".join(f"{s.score:>10.5f}" for s in scores) + f"{best.window_size:>8d}")


if __name__ == "__main__":
    main(tuple(a if a == "clean" else float(a) for a in sys.argv[1:]) or ("clean", 30, 20, 10))
