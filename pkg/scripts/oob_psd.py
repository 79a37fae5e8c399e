"""Aggregate transmit PSD of optimized pulses and CP-OFDM, with the leakage beyond the band edge."""
import argparse
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from popslab import LatticeConfig, PopsConfig, balanced_spec
from popslab.metrics import aggregate_psd, conventional_ofdm_pair, design_pair, oob_leakage


@dataclass
class Config:
    Q: int = 128
    N: int = 160
    D: int = 7
    BdTm: float = 1e-2
    n_subcarriers: int = 65
    oversample: int = 16
    K: int = 21
    max_iters: int = 60


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default="results/oob")
    ap.add_argument("--iters", type=int, default=Config.max_iters)
    args = ap.parse_args()
    cfg = Config(max_iters=args.iters)
    pops = PopsConfig(max_iters=cfg.max_iters, window_search=0)
    curves = {}
    for kind in ("hexagonal", "rectangular"):
        spec = balanced_spec(cfg.BdTm, LatticeConfig(kind, cfg.Q, cfg.N), [cfg.K])
        pair = design_pair(kind, cfg.Q, cfg.N, cfg.BdTm, cfg.D, pops, specs=spec)
        curves[kind] = aggregate_psd(pair.phi, pair.lattice, cfg.n_subcarriers, cfg.oversample)
    phi, _, lat = conventional_ofdm_pair(cfg.Q, cfg.N - cfg.Q)
    curves["ofdm"] = aggregate_psd(phi, lat, cfg.n_subcarriers, cfg.oversample)

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    freq = curves["ofdm"].freq
    cols = [np.interp(freq, c.freq, c.psd_dB) for c in curves.values()]
    np.savetxt(out / "psd_aggregate.csv", np.column_stack([freq] + cols), delimiter=",",
               header="f_over_F," + ",".join(curves), comments="", fmt="%.6g")
    for off in (1, 2, 4, 8):
        print(f"offset {off}F:", "  ".join(f"{k} {oob_leakage(c, off):7.2f} dB" for k, c in curves.items()))


if __name__ == "__main__":
    main()
