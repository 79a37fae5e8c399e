"""SINR versus ping-pong iteration at several SNRs, both lattices.

    python scripts/convergence.py --out results/convergence
"""
import argparse
import math
from dataclasses import dataclass, field
from pathlib import Path

from popslab import LatticeConfig, PopsConfig, balanced_spec, pops_optimize
from popslab.io import write_csv
from popslab.metrics import SweepResult
from popslab.solver import from_db


@dataclass
class Config:
    Q: int = 128
    N: int = 160
    D: int = 7
    BdTm: float = 1e-2
    K: int = 21
    snr_dB: list = field(default_factory=lambda: [25.0, 30.0, math.inf])
    kinds: tuple = ("hexagonal", "rectangular")
    max_iters: int = 100


def run(cfg: Config) -> SweepResult:
    series = {}
    for kind in cfg.kinds:
        lat = LatticeConfig(kind, cfg.Q, cfg.N)
        spec = balanced_spec(cfg.BdTm, lat, [cfg.K])[0]
        for s in cfg.snr_dB:
            res = pops_optimize(spec, lat, PopsConfig(snr=from_db(s), max_iters=cfg.max_iters),
                                cfg.D * cfg.N, cfg.D * cfg.N)
            tr = res.sinr_trace[1::2]  # value after each full ping-pong iteration
            tr = tr + [tr[-1]] * (cfg.max_iters - len(tr))
            series[f"{kind}_snr{s:g}"] = tr
            print(f"{kind:12s} snr={s:>5g} dB  final {tr[-1]:.3f} dB after {res.iterations} iterations")
    return SweepResult("iteration", list(range(1, cfg.max_iters + 1)), series, {"BdTm": cfg.BdTm, "K": cfg.K})


if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", default="results/convergence")
    ap.add_argument("--iters", type=int, default=Config.max_iters)
    ap.add_argument("--K", type=int, default=Config.K)
    args = ap.parse_args()
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    write_csv(out / "sinr_vs_iteration.csv", run(Config(max_iters=args.iters, K=args.K)))
