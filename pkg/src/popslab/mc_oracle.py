"""Monte-Carlo link simulation used as an independent check of the kernel algebra.

Symbols are pushed through sampled channels sample by sample and the
decision variable of symbol ``(0, 0)`` is split into its desired,
interference and noise parts.  Nothing here touches the kernel assembly; the
only import from that side is the result container.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .channel import ScatteringSpec, sample_gains
from .kernels import HermitianKernel
from .lattice import LatticeConfig, SampledWaveform, Window, lattice_point, modulated_shift

CHUNK = 250


@dataclass
class LinkEstimate:
    P_S: float
    P_I: float
    P_N: float
    sinr_dB: float
    ci95_dB: float
    trials: int


def _db(x):
    with np.errstate(divide="ignore"):
        return 10.0 * np.log10(x)


def reachable_points(phi: SampledWaveform, spec: ScatteringSpec, cfg: LatticeConfig, window):
    """Lattice points ``(m, n)``, ``m`` in ``0..Q-1``, whose delayed copies overlap the window."""
    window = Window(*window)
    pmin, pmax = int(spec.delays.min()), int(spec.delays.max())
    pts = []
    for m in range(cfg.Q):
        t0, _ = lattice_point(cfg, m, 0)
        # first/last sample of the union of delayed copies for n = 0
        a = phi.start_index + t0 + pmin
        b = phi.start_index + t0 + len(phi) + pmax
        n_lo = math.floor((window.start - b) / cfg.N)
        n_hi = math.ceil((window.stop - a) / cfg.N)
        for n in range(n_lo, n_hi + 1):
            s = a + n * cfg.N
            e = b + n * cfg.N
            if s < window.stop and e > window.start:
                pts.append((m, n))
    return pts


def _copy_matrices(phi, spec, cfg, window, points):
    """``G[k][:, j]``: copy ``j`` delayed by path ``k``, seen through the window."""
    G = np.zeros((spec.delay.K, window.size, len(points)), dtype=complex)
    for j, (m, n) in enumerate(points):
        c = modulated_shift(phi, cfg, m, n)
        for k, p in enumerate(spec.delays):
            G[k, :, j] = c.moved(c.start_index + int(p)).on_window(window.start, window.size)
    return G


def _qpsk(rng, shape):
    bits = rng.integers(0, 2, size=(2,) + shape)
    return ((2 * bits[0] - 1) + 1j * (2 * bits[1] - 1)) / math.sqrt(2.0)


def _chunks(trials: int):
    sizes = [CHUNK] * (trials // CHUNK)
    if trials % CHUNK:
        sizes.append(trials % CHUNK)
    return sizes


def simulate_link(phi: SampledWaveform, psi: SampledWaveform, spec: ScatteringSpec, cfg: LatticeConfig,
                  snr: float, trials: int, seed: int, window=None, n_doppler_lines: int = 64,
                  transmit: bool = True) -> LinkEstimate:
    """Empirical useful/interference/noise powers at the output of the receive filter.

    ``window`` defaults to the receive waveform's placement.  With
    ``transmit=False`` all symbols are zero and only noise reaches the receiver.
    """
    if trials < 100:
        raise ValueError("need at least 100 trials")
    window = Window(psi.start_index, len(psi)) if window is None else Window(*window)
    psi_w = psi.on_window(window.start, window.size)
    points = reachable_points(phi, spec, cfg, window)
    j0 = points.index((0, 0)) if (0, 0) in points else None
    G = _copy_matrices(phi, spec, cfg, window, points)
    q = np.arange(window.start, window.stop)
    N0 = 0.0 if math.isinf(snr) else phi.norm ** 2 / snr

    s_all, i_all, n_all = [], [], []
    streams = np.random.SeedSequence(seed).spawn(len(_chunks(trials)))
    for size, ss in zip(_chunks(trials), streams):
        rng = np.random.default_rng(ss)
        gains = sample_gains(spec, cfg.Ts, rng, q, size, n_doppler_lines)  # (t, k, q)
        a = _qpsk(rng, (len(points), size))
        if not transmit:
            a[:] = 0.0
        noise = (rng.standard_normal((size, window.size)) + 1j * rng.standard_normal((size, window.size)))
        noise *= math.sqrt(N0 / 2.0)
        # received signal from every symbol, then the (0, 0) part alone
        full = np.einsum("tkq,kqj,jt->tq", gains, G, a)
        if j0 is not None:
            desired = np.einsum("tkq,kq,t->tq", gains, G[:, :, j0], a[j0])
        else:
            desired = np.zeros_like(full)
        interf = full - desired
        s_all.append(np.abs(desired @ psi_w.conj()) ** 2)
        i_all.append(np.abs(interf @ psi_w.conj()) ** 2)
        n_all.append(np.abs(noise @ psi_w.conj()) ** 2)
    s = np.concatenate(s_all)
    i = np.concatenate(i_all)
    nz = np.concatenate(n_all)
    P_S, P_I, P_N = float(s.mean()), float(i.mean()), float(nz.mean())
    sinr = float(_db(P_S / (P_I + P_N))) if P_I + P_N > 0 else math.inf
    return LinkEstimate(P_S, P_I, P_N, sinr, _jackknife_ci(s, i + nz), trials)


def _jackknife_ci(s: np.ndarray, d: np.ndarray) -> float:
    n = s.size
    S, D = s.sum(), d.sum()
    with np.errstate(divide="ignore", invalid="ignore"):
        loo = _db((S - s) / (D - d))
    if not np.all(np.isfinite(loo)):
        return math.inf
    var = (n - 1) / n * np.sum((loo - loo.mean()) ** 2)
    return float(1.96 * math.sqrt(var))


def empirical_kernel(phi: SampledWaveform, spec: ScatteringSpec, cfg: LatticeConfig, window, trials: int,
                     seed: int, n_doppler_lines: int = 64) -> HermitianKernel:
    """Sample average of ``phi~ phi~^H`` for the channel-distorted ``(0, 0)`` copy on the window."""
    window = Window(*window)
    G = _copy_matrices(phi, spec, cfg, window, [(0, 0)])[:, :, 0]  # (k, q)
    q = np.arange(window.start, window.stop)
    acc = np.zeros((window.size, window.size), dtype=complex)
    streams = np.random.SeedSequence(seed).spawn(len(_chunks(trials)))
    for size, ss in zip(_chunks(trials), streams):
        rng = np.random.default_rng(ss)
        gains = sample_gains(spec, cfg.Ts, rng, q, size, n_doppler_lines)
        y = np.einsum("tkq,kq->tq", gains, G)
        acc += y.T @ y.conj()
    return HermitianKernel(acc / trials, window.start)
