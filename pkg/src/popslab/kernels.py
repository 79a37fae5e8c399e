"""Hermitian kernels of the useful, interference and noise powers.

Every kernel is expressed on a *selection window* ``[start, start+size)`` of
the global sample grid: the quadratic form ``x^H K x`` takes the samples of
the waveform that lives on that window.

The interference kernel is obtained as ``infinite - useful`` where the
infinite kernel collects every lattice copy.  Summing the subcarrier
modulations in closed form leaves combs over the sample lag, so only the
time shifts have to be enumerated (and only those whose support touches the
window).
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import toeplitz

from .channel import ScatteringSpec, correlation_lags, correlation_matrix
from .lattice import LatticeConfig, SampledWaveform, Window, modulated_shift


class KernelError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class HermitianKernel:
    entries: np.ndarray
    window_start: int = 0

    def __post_init__(self):
        a = np.asarray(self.entries)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise ValueError("kernel must be a square matrix")
        a = 0.5 * (a + a.conj().T)
        if np.iscomplexobj(a) and not np.any(a.imag):
            a = a.real.copy()
        a.setflags(write=False)
        object.__setattr__(self, "entries", a)
        object.__setattr__(self, "window_start", int(self.window_start))

    @property
    def size(self) -> int:
        return self.entries.shape[0]

    @property
    def window(self) -> Window:
        return Window(self.window_start, self.size)

    @property
    def trace(self) -> float:
        return float(np.trace(self.entries).real)

    def quad(self, x) -> float:
        x = np.asarray(x)
        return float(np.real(np.vdot(x, self.entries @ x)))

    def __add__(self, other):
        _same_window(self, other)
        return HermitianKernel(self.entries + other.entries, self.window_start)

    def __sub__(self, other):
        _same_window(self, other)
        return HermitianKernel(self.entries - other.entries, self.window_start)


def _same_window(a: HermitianKernel, b: HermitianKernel):
    if a.window != b.window:
        raise ValueError(f"kernel windows differ: {a.window} vs {b.window}")


def _lags(size: int) -> np.ndarray:
    return np.arange(size)


def even_comb_lags(Q: int, lags) -> np.ndarray:
    """``sum_{d<Q/2} exp(4j*pi*d*k/Q)``: ``Q/2`` when ``k`` is a multiple of ``Q/2``."""
    lags = np.asarray(lags)
    return np.where(lags % (Q // 2) == 0, Q / 2.0, 0.0)


def odd_comb_lags(Q: int, lags) -> np.ndarray:
    """``sum_{d<Q/2} exp(2j*pi*(2d+1)*k/Q)``: ``+Q/2`` at ``k = 0 mod Q``, ``-Q/2`` at ``k = Q/2 mod Q``."""
    lags = np.asarray(lags) % Q
    return np.where(lags == 0, Q / 2.0, np.where(lags == Q // 2, -Q / 2.0, 0.0))


def full_comb_lags(Q: int, lags) -> np.ndarray:
    """``sum_{d<Q} exp(2j*pi*d*k/Q)`` for the rectangular lattice."""
    return np.where(np.asarray(lags) % Q == 0, float(Q), 0.0)


def _comb_kernel(comb, Q: int, corr: HermitianKernel) -> HermitianKernel:
    if Q % 2:
        raise ValueError("hexagonal combs need an even Q")
    c = toeplitz(comb(Q, _lags(corr.size)))
    return HermitianKernel(corr.entries * c, corr.window_start)


def comb_even(Q: int, corr: HermitianKernel) -> HermitianKernel:
    return _comb_kernel(even_comb_lags, Q, corr)


def comb_odd(Q: int, corr: HermitianKernel) -> HermitianKernel:
    return _comb_kernel(odd_comb_lags, Q, corr)


def correlation_kernel(spec: ScatteringSpec, Ts: float, window) -> HermitianKernel:
    window = Window(*window)
    return HermitianKernel(correlation_matrix(spec, Ts, window.size), window.start)


def _real_if_possible(x: np.ndarray) -> np.ndarray:
    return x.real if not np.any(x.imag) else x


def _delayed_gram(w: SampledWaveform, spec: ScatteringSpec):
    """``sum_k pi_k sigma_{p_k}(w) sigma_{p_k}(w)^H`` on the span of all delayed copies.

    Returns the matrix and the global index of its first row.
    """
    delays = spec.delays
    lo = int(delays.min())
    L = len(w) + int(delays.max()) - lo
    x = _real_if_possible(w.samples)
    X = np.zeros((delays.size, L), dtype=x.dtype)
    for k, p in enumerate(delays):
        X[k, p - lo:p - lo + len(w)] = x
    G = (X.T * spec.powers) @ X.conj()
    return G, w.start_index + lo


def _accumulate(acc: np.ndarray, G: np.ndarray, g_start: int, window: Window) -> bool:
    lo = max(g_start, window.start)
    hi = min(g_start + G.shape[0], window.stop)
    if lo >= hi:
        return False
    acc[lo - window.start:hi - window.start, lo - window.start:hi - window.start] += \
        G[lo - g_start:hi - g_start, lo - g_start:hi - g_start]
    return True


def useful_kernel(w: SampledWaveform, spec: ScatteringSpec, window) -> HermitianKernel:
    """Mean useful-signal kernel ``R (.) sum_k pi_k sigma_{p_k}(w) sigma_{p_k}(w)^H`` on the window."""
    window = Window(*window)
    G, g0 = _delayed_gram(w, spec)
    acc = np.zeros((window.size, window.size), dtype=G.dtype)
    if not _accumulate(acc, G, g0, window):
        raise KernelError(f"no delayed copy of the waveform reaches window {window}")
    R = correlation_matrix(spec, w.Ts, window.size)
    return HermitianKernel(R * acc, window.start)


def shift_range(span_start: int, span_len: int, window: Window, period: int, base: int = 0) -> range:
    """Integers n such that ``[span_start + base + n*period, +span_len)`` meets the window."""
    lo = (window.start - span_start - base - span_len) // period + 1
    hi = -((span_start + base - window.stop) // period) - 1
    return range(lo, hi + 1)


def _comb_sum(G, g0, window, period, base, n_range=None):
    acc = np.zeros((window.size, window.size), dtype=G.dtype)
    if n_range is None:
        n_range = shift_range(g0, G.shape[0], window, period, base)
    for n in n_range:
        _accumulate(acc, G, g0 + base + n * period, window)
    return acc


def infinite_kernel(w: SampledWaveform, spec: ScatteringSpec, cfg: LatticeConfig, window,
                    n_range=None) -> HermitianKernel:
    """Kernel summing the mean powers of *all* lattice copies, ``(0, 0)`` included.

    Hexagonal: even subcarriers sit on shifts ``nN``, odd ones on
    ``(n + 1/2)N``, weighted by the even/odd lag combs.  Rectangular: shifts
    ``nN`` with the full ``Q``-periodic comb.  ``n_range`` overrides the
    automatic truncation to shifts that touch the window.
    """
    window = Window(*window)
    G, g0 = _delayed_gram(w, spec)
    lags = _lags(window.size)
    r = correlation_lags(spec, w.Ts, lags)

    def weighted(comb_vals, acc):
        c = r * comb_vals
        T = toeplitz(c, np.conj(c)) if np.iscomplexobj(c) else toeplitz(c)
        return T * acc

    if cfg.is_hexagonal:
        even = _comb_sum(G, g0, window, cfg.N, 0, n_range)
        odd = _comb_sum(G, g0, window, cfg.N, cfg.N // 2, n_range)
        total = weighted(even_comb_lags(cfg.Q, lags), even) + weighted(odd_comb_lags(cfg.Q, lags), odd)
    else:
        total = weighted(full_comb_lags(cfg.Q, lags), _comb_sum(G, g0, window, cfg.N, 0, n_range))
    if not np.any(total):
        raise KernelError(f"no lattice copy of the waveform reaches window {window}")
    return HermitianKernel(total, window.start)


def interference_kernel(w: SampledWaveform, spec: ScatteringSpec, cfg: LatticeConfig, window,
                        useful: HermitianKernel = None) -> HermitianKernel:
    if useful is None:
        useful = useful_kernel(w, spec, window)
    return infinite_kernel(w, spec, cfg, window) - useful


def kernel_pair(w: SampledWaveform, spec: ScatteringSpec, cfg: LatticeConfig, window):
    """``(KS, KI)`` built from one waveform on one window."""
    KS = useful_kernel(w, spec, window)
    return KS, interference_kernel(w, spec, cfg, window, KS)


def kin_kernel(KI: HermitianKernel, snr: float, other_norm_sq: float) -> HermitianKernel:
    """Interference-plus-noise kernel ``KI + ||other||^2 / snr * I``."""
    if not snr > 0:
        raise ValueError("snr must be positive (use math.inf for a noiseless link)")
    if other_norm_sq <= 0:
        raise ValueError("norm of the fixed waveform must be positive")
    if math.isinf(snr):
        return KI
    return HermitianKernel(KI.entries + (other_norm_sq / snr) * np.eye(KI.size), KI.window_start)


def brute_force_total_kernel(w: SampledWaveform, spec: ScatteringSpec, cfg: LatticeConfig, window,
                             mn_range=None) -> HermitianKernel:
    """Direct sum over lattice points and paths of the delayed modulated copies.

    ``mn_range`` is an iterable of ``(m, n)``; by default every subcarrier
    ``0..Q-1`` and a time range wide enough to reach past the window.
    """
    window = Window(*window)
    if mn_range is None:
        delays = spec.delays
        reach = len(w) + window.size + int(np.abs(delays).max()) + abs(window.start - w.start_index)
        n_max = reach // cfg.N + cfg.Q // 2 + 2
        mn_range = [(m, n) for m in range(cfg.Q) for n in range(-n_max, n_max + 1)]
    R = correlation_matrix(spec, w.Ts, window.size)
    acc = np.zeros((window.size, window.size), dtype=complex)
    for m, n in mn_range:
        c = modulated_shift(w, cfg, m, n)
        for p, pw in zip(spec.delays, spec.powers):
            x = c.moved(c.start_index + int(p)).on_window(window.start, window.size)
            if np.any(x):
                acc += pw * np.outer(x, x.conj())
    return HermitianKernel(R * acc, window.start)
