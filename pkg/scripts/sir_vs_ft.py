"""Optimized SIR against FT (and OFDM with the same CP) for a few waveform durations."""
import argparse
from dataclasses import dataclass, field
from pathlib import Path

from popslab import PopsConfig
from popslab.io import write_csv
from popslab.metrics import sweep_ft


@dataclass
class Config:
    Q: int = 128
    BdTm: float = 1e-2
    D_list: list = field(default_factory=lambda: [3, 7])
    FT_list: list = field(default_factory=lambda: [1.0625, 1.125, 1.25, 1.375, 1.5])
    K_grid: tuple = (9, 15, 21)
    max_iters: int = 100
    window_search: int = 0
    workers: int = 1


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default="results/sir_vs_ft")
    ap.add_argument("--Q", type=int, default=Config.Q)
    ap.add_argument("--BdTm", type=float, default=Config.BdTm)
    ap.add_argument("--iters", type=int, default=Config.max_iters)
    ap.add_argument("--workers", type=int, default=1)
    args = ap.parse_args()
    cfg = Config(Q=args.Q, BdTm=args.BdTm, max_iters=args.iters, workers=args.workers)
    pops = PopsConfig(max_iters=cfg.max_iters, window_search=cfg.window_search, K_grid=cfg.K_grid)
    res = sweep_ft(cfg.Q, cfg.BdTm, cfg.D_list, cfg.FT_list, pops=pops, workers=cfg.workers)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    write_csv(out / f"sweep_ft_BdTm{cfg.BdTm:g}.csv", res)
    for name, vals in res.series.items():
        print(name.ljust(16), " ".join(f"{v:7.2f}" for v in vals))


if __name__ == "__main__":
    main()
