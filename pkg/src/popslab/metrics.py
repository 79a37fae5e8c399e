"""Experiments on designed waveform pairs: sweeps, spectra, robustness, codebooks."""
from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .channel import ScatteringSpec, apply_sync_errors, nominal_spec
from .lattice import HEXAGONAL, RECTANGULAR, LatticeConfig, SampledWaveform, modulated_shift
from .solver import PopsConfig, canonical_phase, optimize_balanced, sinr_of_pair


@dataclass
class SweepResult:
    axis_name: str
    axis_values: list
    series: dict
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        self.axis_values = list(self.axis_values)
        for name, vals in self.series.items():
            if len(vals) != len(self.axis_values):
                raise ValueError(f"series {name!r} has {len(vals)} points for {len(self.axis_values)} axis values")


@dataclass
class DesignedPair:
    """A transmit/receive pair together with the channel and lattice it was designed for."""

    phi: SampledWaveform
    psi: SampledWaveform
    spec: ScatteringSpec
    lattice: LatticeConfig
    design_BdTm: float = None
    snr: float = math.inf
    sir_dB: float = None

    def sinr(self, spec: ScatteringSpec = None, snr: float = None) -> float:
        return sinr_of_pair(self.phi, self.psi, self.spec if spec is None else spec, self.lattice,
                            self.snr if snr is None else snr)


@dataclass
class Codebook:
    entries: list

    def __post_init__(self):
        d = [e.design_BdTm for e in self.entries]
        if any(b <= a for a, b in zip(d, d[1:])):
            raise ValueError("codebook design points must be strictly increasing")
        for e in self.entries:
            for w in (e.phi, e.psi):
                if abs(w.norm - 1.0) > 1e-12:
                    raise ValueError("codebook waveforms must have unit norm")


def _map(fn, items, workers: int = 1):
    items = list(items)
    if workers and workers > 1 and len(items) > 1:
        with ProcessPoolExecutor(max_workers=workers) as ex:
            return list(ex.map(fn, items))
    return [fn(x) for x in items]


def lattice_for(kind: str, Q: int, FT, Ts: float = 1e-6) -> LatticeConfig:
    N = float(FT) * Q
    if abs(N - round(N)) > 1e-9:
        raise ValueError(f"FT={FT} with Q={Q} does not give an integer N")
    return LatticeConfig(kind, Q, int(round(N)), Ts)


def conventional_ofdm_pair(Q: int, cp: int, Ts: float = 1e-6):
    """CP-OFDM as a lattice pair: ``Q + cp`` sample rectangle out, ``Q`` sample rectangle in after the prefix."""
    cfg = LatticeConfig(RECTANGULAR, Q, Q + cp, Ts)
    phi = SampledWaveform(np.full(Q + cp, 1.0 / math.sqrt(Q + cp)), Ts, 0)
    psi = SampledWaveform(np.full(Q, 1.0 / math.sqrt(Q)), Ts, cp)
    return phi, psi, cfg


def design_pair(kind: str, Q: int, N: int, BdTm: float, D: int, pops: PopsConfig, Ts: float = 1e-6,
                specs=None) -> DesignedPair:
    """Optimize a pair of ``D`` symbol periods on the best-balanced channel."""
    cfg = LatticeConfig(kind, Q, N, Ts)
    res = optimize_balanced(BdTm, cfg, pops, D * N, D * N, specs=specs)
    return pair_from_result(res, cfg, BdTm, pops.snr)


def pair_from_result(res, cfg: LatticeConfig, BdTm: float, snr: float) -> DesignedPair:
    """Wrap an optimizer result; the recorded SIR is re-evaluated from the quadratic forms."""
    sir = sinr_of_pair(res.phi_opt, res.psi_opt, res.spec, cfg, snr)
    return DesignedPair(res.phi_opt, res.psi_opt, res.spec, cfg, BdTm, snr, sir)


def ofdm_design(Q: int, cp: int, BdTm: float, snr: float = math.inf, Ts: float = 1e-6,
                spec: ScatteringSpec = None) -> DesignedPair:
    """CP-OFDM on the channel whose spreads are balanced against its lattice (``Tm/T = Bd/F``).

    OFDM has nothing to optimize, so it gets the nominal split rather than a
    search over splits (which would just park the delay spread on the prefix).
    """
    phi, psi, cfg = conventional_ofdm_pair(Q, cp, Ts)
    if spec is None:
        spec = nominal_spec(BdTm, cfg)
    return DesignedPair(phi, psi, spec, cfg, BdTm, snr, sinr_of_pair(phi, psi, spec, cfg, snr))


def _ft_point(args):
    kind, Q, FT, BdTm, D, pops, Ts = args
    cfg = lattice_for(RECTANGULAR if kind == "ofdm" else kind, Q, FT, Ts)
    if kind == "ofdm":
        return ofdm_design(Q, cfg.N - Q, BdTm, pops.snr, Ts).sir_dB
    return design_pair(kind, Q, cfg.N, BdTm, D, pops, Ts).sir_dB


def sweep_ft(Q: int, BdTm: float, D_list, FT_list, kinds=(HEXAGONAL, RECTANGULAR), pops: PopsConfig = None,
             include_ofdm: bool = True, Ts: float = 1e-6, workers: int = 1) -> SweepResult:
    """Optimized SIR/SINR versus FT, one series per (lattice, duration)."""
    pops = pops or PopsConfig()
    jobs, names = [], []
    for kind in kinds:
        for D in D_list:
            names.append(f"{kind}_D{D}")
            jobs.extend((kind, Q, ft, BdTm, D, pops, Ts) for ft in FT_list)
    if include_ofdm:
        names.append("ofdm")
        jobs.extend(("ofdm", Q, ft, BdTm, 1, pops, Ts) for ft in FT_list)
    vals = _map(_ft_point, jobs, workers)
    n = len(FT_list)
    series = {name: vals[i * n:(i + 1) * n] for i, name in enumerate(names)}
    meta = {"Q": Q, "BdTm": BdTm, "snr": pops.snr, "K_grid": list(pops.K_grid)}
    return SweepResult("FT", [float(f) for f in FT_list], series, meta)


def _spread_point(args):
    kind, Q, FT, D, BdTm, pops, Ts = args
    return _ft_point((kind, Q, FT, BdTm, D, pops, Ts))


def sweep_spread(Q: int, FT, D: int, BdTm_list, pops: PopsConfig = None, kinds=(HEXAGONAL, RECTANGULAR),
                 include_ofdm: bool = True, Ts: float = 1e-6, workers: int = 1) -> SweepResult:
    """Optimized SIR versus the channel spread factor."""
    pops = pops or PopsConfig()
    names = list(kinds) + (["ofdm"] if include_ofdm else [])
    jobs = [(k, Q, FT, D, b, pops, Ts) for k in names for b in BdTm_list]
    vals = _map(_spread_point, jobs, workers)
    n = len(BdTm_list)
    series = {name: vals[i * n:(i + 1) * n] for i, name in enumerate(names)}
    return SweepResult("BdTm", list(BdTm_list), series, {"Q": Q, "FT": float(FT), "D": D, "snr": pops.snr})


def sweep_q(Q_list, D_list, FT_list, BdTm: float, pops: PopsConfig = None, kind: str = HEXAGONAL,
            Ts: float = 1e-6, workers: int = 1) -> SweepResult:
    """Optimized SIR versus the number of subcarriers, one series per (D, FT)."""
    pops = pops or PopsConfig()
    names, jobs = [], []
    for D in D_list:
        for ft in FT_list:
            names.append(f"D{D}_FT{float(ft):g}")
            jobs.extend((kind, Q, ft, BdTm, D, pops, Ts) for Q in Q_list)
    vals = _map(_ft_point, jobs, workers)
    n = len(Q_list)
    series = {name: vals[i * n:(i + 1) * n] for i, name in enumerate(names)}
    return SweepResult("Q", list(Q_list), series, {"BdTm": BdTm, "kind": kind, "snr": pops.snr})


def sweep_snr(Q: int, FT_list, D: int, BdTm: float, snr_dB_list, pops: PopsConfig = None,
              kind: str = HEXAGONAL, Ts: float = 1e-6, workers: int = 1) -> SweepResult:
    """Optimized SINR versus SNR for several lattice densities."""
    pops = pops or PopsConfig()
    names, jobs = [], []
    for ft in FT_list:
        names.append(f"FT{float(ft):g}")
        for s in snr_dB_list:
            p = PopsConfig(**{**pops.__dict__, "snr": 10.0 ** (s / 10.0) if math.isfinite(s) else math.inf})
            jobs.append((kind, Q, ft, BdTm, D, p, Ts))
    vals = _map(_ft_point, jobs, workers)
    n = len(snr_dB_list)
    series = {name: vals[i * n:(i + 1) * n] for i, name in enumerate(names)}
    return SweepResult("snr_dB", list(snr_dB_list), series, {"Q": Q, "D": D, "BdTm": BdTm, "kind": kind})


@dataclass
class PsdResult:
    freq: np.ndarray  # in units of F
    psd_dB: np.ndarray  # peak at 0 dB
    linear: np.ndarray  # periodogram |X|^2 / len(w) (unnormalized)
    band_edge: float = 0.0  # in units of F


def _fft_len(n_samples: int, Q: int, oversample: int) -> int:
    base = oversample * Q
    return base * max(1, -(-n_samples // base))


def _peak_db(lin: np.ndarray) -> np.ndarray:
    with np.errstate(divide="ignore"):
        return 10.0 * np.log10(lin / lin.max())


def psd(w: SampledWaveform, Q: int, oversample: int = 64) -> PsdResult:
    """Periodogram of one pulse on a frequency grid of ``F/oversample``, centred on the carrier."""
    L = _fft_len(len(w), Q, oversample)
    X = np.fft.fftshift(np.fft.fft(w.samples, L))
    lin = np.abs(X) ** 2 / len(w)
    freq = (np.arange(L) - L // 2) * Q / L
    return PsdResult(freq, _peak_db(lin), lin, 0.0)


def aggregate_psd(w: SampledWaveform, cfg: LatticeConfig, n_subcarriers: int = 65, oversample: int = 64) -> PsdResult:
    """Summed spectra of ``n_subcarriers`` contiguous modulated copies centred on subcarrier 0."""
    if n_subcarriers > cfg.Q:
        raise ValueError(f"cannot aggregate {n_subcarriers} subcarriers out of Q={cfg.Q}")
    base = psd(w, cfg.Q, oversample)
    step = base.freq.size // cfg.Q  # bins per subcarrier spacing
    half = (n_subcarriers - 1) // 2
    ms = range(-half, n_subcarriers - half)
    lin = sum(np.roll(base.linear, m * step) for m in ms)
    return PsdResult(base.freq, _peak_db(lin), lin, n_subcarriers / 2.0)


def oob_leakage(p: PsdResult, band_edge_offset: float) -> float:
    """Largest normalized PSD (dB) at ``|f| >= band_edge + offset`` (units of F)."""
    mask = np.abs(p.freq) >= p.band_edge + band_edge_offset - 1e-12
    if not np.any(mask):
        raise ValueError("offset lies beyond the sampled band")
    return float(p.psd_dB[mask].max())


def perturbed_sir(pair: DesignedPair, axis: str, value: float, snr: float = math.inf) -> float:
    if axis == "freq":
        spec = apply_sync_errors(pair.spec, 0, value * pair.lattice.F, pair.lattice.Ts)
    elif axis == "time":
        if value != int(value):
            raise ValueError("time errors are whole samples")
        spec = apply_sync_errors(pair.spec, int(value), 0.0, pair.lattice.Ts)
    else:
        raise ValueError(f"unknown sensitivity axis {axis!r}")
    return sinr_of_pair(pair.phi, pair.psi, spec, pair.lattice, snr)


def sensitivity_sweep(systems: dict, axis: str, values, snr: float = math.inf) -> SweepResult:
    """SIR of fixed pairs under frequency (``dnu/F``) or timing (``dtau/Ts``) errors."""
    values = list(values)
    series = {name: [perturbed_sir(p, axis, v, snr) for v in values] for name, p in systems.items()}
    axis_name = "dnu_over_F" if axis == "freq" else "dtau_over_Ts"
    return SweepResult(axis_name, values, series, {"snr": snr})


def build_codebook(BdTm_list, cfg: LatticeConfig, D: int, pops: PopsConfig, spec_for=nominal_spec) -> Codebook:
    """One optimized pair per design spread factor, each on the channel ``spec_for(BdTm, cfg)``."""
    entries = []
    for b in sorted(BdTm_list):
        pair = design_pair(cfg.kind, cfg.Q, cfg.N, b, D, pops, cfg.Ts, specs=[spec_for(b, cfg)])
        pair.phi, pair.psi = canonical_phase(pair.phi), canonical_phase(pair.psi)
        entries.append(pair)
    return Codebook(entries)


def mismatch_matrix(codebook: Codebook, eval_BdTm_grid, snr: float = math.inf, spec_for=nominal_spec) -> SweepResult:
    """SIR of every codebook pair across actual spread factors, plus their upper envelope."""
    grid = list(eval_BdTm_grid)
    series = {}
    for e in codebook.entries:
        series[f"pair_{e.design_BdTm:g}"] = [e.sinr(spec_for(b, e.lattice), snr) for b in grid]
    series["envelope"] = [max(vals) for vals in zip(*series.values())]
    return SweepResult("BdTm", grid, series, {"snr": snr})


def time_reverse_match(phi: SampledWaveform, psi: SampledWaveform) -> float:
    """``max |<psi, conj(reversed phi)>|`` over integer alignments, both normalized.

    Equals 1 exactly when ``psi`` is a delayed, phase-rotated copy of the
    matched filter of ``phi``.
    """
    a = psi.samples / psi.norm
    b = np.conj(phi.samples[::-1]) / phi.norm
    return float(np.abs(np.correlate(a, b, mode="full")).max())
