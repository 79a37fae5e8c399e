"""Design a small codebook over spread factors and tabulate the SIR of every entry off its design point."""
import argparse
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from popslab import LatticeConfig, PopsConfig
from popslab.io import write_codebook, write_csv
from popslab.metrics import build_codebook, mismatch_matrix


@dataclass
class Config:
    kind: str = "hexagonal"
    Q: int = 128
    N: int = 160
    D: int = 3
    design: list = field(default_factory=lambda: [1e-4, 1e-3, 1e-2])
    eval_grid: list = field(default_factory=lambda: list(np.logspace(-5, -1, 17)))
    max_iters: int = 100


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default="results/codebook")
    ap.add_argument("--kind", default=Config.kind)
    ap.add_argument("--iters", type=int, default=Config.max_iters)
    args = ap.parse_args()
    cfg = Config(kind=args.kind, max_iters=args.iters)
    lat = LatticeConfig(cfg.kind, cfg.Q, cfg.N)
    cb = build_codebook(cfg.design, lat, cfg.D, PopsConfig(max_iters=cfg.max_iters, window_search=0))
    res = mismatch_matrix(cb, cfg.eval_grid)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    write_codebook(out / "codebook.popscb", cb)
    write_csv(out / "mismatch.csv", res)
    for name, vals in res.series.items():
        print(name.ljust(12), " ".join(f"{v:6.1f}" for v in vals))


if __name__ == "__main__":
    main()
