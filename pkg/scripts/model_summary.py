"""Layer stacks and parameter counts of the four classifiers next to the published counts."""

from rffp.nn import ARCHITECTURES, architecture_config
from rffp.nn.model import PUBLISHED_COMPLEXITY


def main():
    print(f"{'model':<10} {'optimizer':<8} {'lr':>7} {'depth':>5} {'params':>8}   published depth/params")
    for kind in ARCHITECTURES:
        cfg = architecture_config(kind)
        pub = PUBLISHED_COMPLEXITY[kind]
        print(f"{kind:<10} {cfg.optimizer:<8} {cfg.learning_rate:>7.0e} {cfg.depth:>5d} {cfg.param_count:>8,d}"
              f"   {pub['depth']:>2d} / {pub['params']:,d}")
        print("           " + " -> ".join(s.kind + (f"({s.units})" if s.units else "") for s in cfg.layers))


if __name__ == "__main__":
    main()
