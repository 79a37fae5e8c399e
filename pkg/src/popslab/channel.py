"""Separable WSSUS channel statistics and random realizations.

A channel is described by a discrete delay profile (integer sample delays
with powers summing to one) and a Doppler spectrum shared by every path,
either Jakes (classical U-shaped, autocorrelation J0) or a finite set of
spectral lines.  Deterministic time/frequency offsets ride along so the same
object can describe synchronization errors.

Conventions: the Doppler spread is ``Bd = 2*f_D`` and the delay spread is
``Tm = (max delay - min delay)*Ts``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Union

import numpy as np
from scipy.linalg import toeplitz

from .lattice import LatticeConfig

_SERIES_LIMIT = 12.0


def _j0_series(x: np.ndarray) -> np.ndarray:
    y = (x / 2.0) ** 2
    term = np.ones_like(x)
    total = np.ones_like(x)
    # |x| <= 12 needs ~45 terms before the tail drops under 1e-17
    for k in range(1, 60):
        term = term * (-y) / (k * k)
        total = total + term
    return total


def _j0_quadrature(x: np.ndarray) -> np.ndarray:
    # trapezoid on a periodic analytic integrand: geometric convergence once
    # the node count exceeds the oscillation count
    M = int(np.max(np.abs(x))) + 64
    theta = (np.arange(M) + 0.5) * np.pi / M
    return np.cos(np.multiply.outer(x, np.sin(theta))).mean(axis=-1)


def bessel_j0(x) -> np.ndarray:
    """Zeroth-order Bessel function of the first kind, real argument."""
    x = np.abs(np.asarray(x, dtype=float))
    out = np.empty_like(x)
    small = x <= _SERIES_LIMIT
    out[small] = _j0_series(x[small])
    if np.any(~small):
        big = x[~small]
        vals = np.empty_like(big)
        # chunk so the (n, M) cosine table stays small
        for i in range(0, big.size, 256):
            vals[i:i + 256] = _j0_quadrature(big[i:i + 256])
        out[~small] = vals
    return out


@dataclass(frozen=True)
class DelayProfile:
    delays: tuple
    powers: tuple

    def __post_init__(self):
        d = tuple(int(p) for p in self.delays)
        w = tuple(float(p) for p in self.powers)
        if len(d) != len(w) or not d:
            raise ValueError("delay profile needs matching, non-empty delays and powers")
        if any(b <= a for a, b in zip(d, d[1:])):
            raise ValueError("delays must be distinct and ascending")
        if any(p < 0 for p in w):
            raise ValueError("path powers must be nonnegative")
        if abs(math.fsum(w) - 1.0) > 1e-12:
            raise ValueError(f"path powers sum to {math.fsum(w)!r}, expected 1")
        object.__setattr__(self, "delays", d)
        object.__setattr__(self, "powers", w)

    @property
    def K(self) -> int:
        return len(self.delays)

    @property
    def mean_delay(self) -> float:
        return math.fsum(p * w for p, w in zip(self.delays, self.powers))

    @property
    def spread_samples(self) -> int:
        return self.delays[-1] - self.delays[0]


@dataclass(frozen=True)
class Jakes:
    f_D: float = 0.0

    def __post_init__(self):
        if self.f_D < 0:
            raise ValueError("f_D must be nonnegative")


@dataclass(frozen=True)
class Lines:
    freqs: tuple
    weights: tuple

    def __post_init__(self):
        f = tuple(float(v) for v in self.freqs)
        w = tuple(float(v) for v in self.weights)
        if len(f) != len(w) or not f:
            raise ValueError("line spectrum needs matching, non-empty freqs and weights")
        if any(v < 0 for v in w) or abs(math.fsum(w) - 1.0) > 1e-12:
            raise ValueError("line weights must be nonnegative and sum to 1")
        object.__setattr__(self, "freqs", f)
        object.__setattr__(self, "weights", w)


DopplerSpectrum = Union[Jakes, Lines]
NO_DOPPLER = Jakes(0.0)


def doppler_support(doppler: DopplerSpectrum) -> float:
    if isinstance(doppler, Jakes):
        return doppler.f_D
    return max(abs(v) for v in doppler.freqs)


@dataclass(frozen=True)
class ScatteringSpec:
    """Separable scattering function ``S(p, nu) = alpha(nu) * beta(p)`` plus offsets."""

    delay: DelayProfile
    doppler: DopplerSpectrum = NO_DOPPLER
    time_offset_samples: int = 0
    freq_offset: float = 0.0

    @property
    def delays(self) -> np.ndarray:
        """Effective path delays, time offset included."""
        return np.asarray(self.delay.delays, dtype=np.int64) + int(self.time_offset_samples)

    @property
    def powers(self) -> np.ndarray:
        return np.asarray(self.delay.powers)

    @property
    def mean_delay(self) -> float:
        return self.delay.mean_delay + self.time_offset_samples

    def is_real(self) -> bool:
        """True when the time autocorrelation is real (no phase rotation)."""
        return isinstance(self.doppler, Jakes) and self.freq_offset == 0.0


def single_path(delay: int = 0, doppler: DopplerSpectrum = NO_DOPPLER) -> ScatteringSpec:
    return ScatteringSpec(DelayProfile((delay,), (1.0,)), doppler)


def exponential_profile(K: int, b: float = None) -> DelayProfile:
    """``K`` contiguous taps with powers ``(1-b)/(1-b**K) * b**k``.

    Without ``b`` the decay is set so the last tap sits 10 dB under the first.
    """
    if K < 1:
        raise ValueError("K must be at least 1")
    if K == 1:
        return DelayProfile((0,), (1.0,))
    if b is None:
        b = default_decay(K)
    if not 0.0 < b < 1.0:
        raise ValueError(f"decay factor must lie in (0, 1), got {b}")
    k = np.arange(K)
    p = (1.0 - b) / (1.0 - b ** K) * b ** k
    # absorb the rounding residue in the largest tap so the sum is 1 to the ulp
    p[0] += 1.0 - math.fsum(p)
    return DelayProfile(tuple(range(K)), tuple(p))


def default_decay(K: int) -> float:
    return 0.1 ** (1.0 / (K - 1))


def _check_nyquist(f: float, Ts: float):
    if not 0.0 <= f < 0.5 / Ts:
        raise ValueError(f"Doppler support {f} Hz not below Nyquist {0.5 / Ts} Hz")


def jakes_autocorrelation(f_D: float, Ts: float, size: int) -> np.ndarray:
    """``size x size`` Toeplitz matrix ``J0(2*pi*f_D*Ts*(p-q))``."""
    _check_nyquist(f_D, Ts)
    return toeplitz(bessel_j0(2 * np.pi * f_D * Ts * np.arange(size)))


def correlation_lags(spec: ScatteringSpec, Ts: float, lags: np.ndarray) -> np.ndarray:
    """Time autocorrelation ``E[c(q+l) c*(q)]`` of the Doppler process at integer lags.

    Includes the deterministic frequency offset as the phase ``exp(2j*pi*dnu*Ts*l)``.
    Returns a real array when the result has no imaginary part.
    """
    lags = np.asarray(lags)
    d = spec.doppler
    _check_nyquist(doppler_support(d), Ts)
    if isinstance(d, Jakes):
        r = bessel_j0(2 * np.pi * d.f_D * Ts * lags)
    else:
        r = np.zeros(lags.shape, dtype=complex)
        for nu, w in zip(d.freqs, d.weights):
            r += w * np.exp(2j * np.pi * nu * Ts * lags)
    if spec.freq_offset:
        r = r * np.exp(2j * np.pi * spec.freq_offset * Ts * lags)
    return r


def correlation_matrix(spec: ScatteringSpec, Ts: float, size: int) -> np.ndarray:
    """The offset-adjusted autocorrelation matrix with entries ``R[p, q] = r(p - q)``."""
    r = correlation_lags(spec, Ts, np.arange(size))
    if np.iscomplexobj(r):
        return toeplitz(r, np.conj(r))
    return toeplitz(r)


def reverse(spec: ScatteringSpec) -> ScatteringSpec:
    """Mirror the scattering function: ``S(p, nu) -> S(-p, -nu)``."""
    d = spec.delay
    delay = DelayProfile(tuple(-p for p in reversed(d.delays)), tuple(reversed(d.powers)))
    doppler = spec.doppler
    if isinstance(doppler, Lines):
        doppler = Lines(tuple(-f for f in doppler.freqs), doppler.weights)
    return ScatteringSpec(delay, doppler, -spec.time_offset_samples, -spec.freq_offset)


def apply_sync_errors(spec: ScatteringSpec, dt_samples: int, dnu: float, Ts: float = None) -> ScatteringSpec:
    """Add a timing error (samples) and a carrier frequency error (Hz)."""
    out = replace(spec, time_offset_samples=spec.time_offset_samples + int(dt_samples),
                  freq_offset=spec.freq_offset + float(dnu))
    if Ts is not None:
        _check_nyquist(doppler_support(out.doppler) + abs(out.freq_offset), Ts)
    return out


def balanced_spec(BdTm: float, cfg: LatticeConfig, K_grid) -> list:
    """One exponential-profile Jakes channel per ``K`` with ``2*f_D*(K-1)*Ts = BdTm``."""
    K_grid = list(K_grid)
    if not K_grid:
        raise ValueError("empty K grid")
    if BdTm <= 0:
        raise ValueError("BdTm must be positive")
    out = []
    for K in K_grid:
        if K < 2:
            raise ValueError("balanced channels need K >= 2 so that Tm > 0")
        Tm = (K - 1) * cfg.Ts
        f_D = BdTm / (2.0 * Tm)
        _check_nyquist(f_D, cfg.Ts)
        out.append(ScatteringSpec(exponential_profile(K), Jakes(f_D)))
    return out


def nominal_K(BdTm: float, cfg: LatticeConfig) -> int:
    """Tap count that balances the spreads against the lattice: ``Tm/T = Bd/F``."""
    Tm = math.sqrt(BdTm * cfg.N * cfg.Q)
    return max(2, int(round(Tm)) + 1)


def nominal_spec(BdTm: float, cfg: LatticeConfig) -> ScatteringSpec:
    return balanced_spec(BdTm, cfg, [nominal_K(BdTm, cfg)])[0]


def doppler_lines(spec: ScatteringSpec, rng: np.random.Generator, trials: int, n_lines: int):
    """Per-trial Doppler frequencies and line weights, shapes ``(trials, L)`` and ``(L,)``."""
    d = spec.doppler
    if isinstance(d, Jakes):
        if d.f_D == 0.0:
            return np.zeros((trials, 1)), np.ones(1)
        theta = rng.uniform(0.0, np.pi, size=(trials, n_lines))
        return d.f_D * np.cos(theta), np.full(n_lines, 1.0 / n_lines)
    return np.broadcast_to(np.asarray(d.freqs), (trials, len(d.freqs))), np.asarray(d.weights)


def sample_gains(spec: ScatteringSpec, Ts: float, rng: np.random.Generator, q: np.ndarray,
                 trials: int, n_lines: int = 64) -> np.ndarray:
    """Time-varying tap gains ``c[t, k, i]`` for trial t, path k, at global sample ``q[i]``.

    Every (path, line) pair gets an independent circular Gaussian amplitude of
    variance ``pi_k * weight``; Jakes lines use ``nu = f_D cos(theta)`` with
    ``theta`` uniform on ``[0, pi)``, drawn afresh per path and trial.
    """
    q = np.asarray(q)
    K = spec.delay.K
    powers = spec.powers
    out = np.zeros((trials, K, q.size), dtype=complex)
    for k in range(K):
        nu, w = doppler_lines(spec, rng, trials, n_lines)
        L = w.size
        amp = (rng.standard_normal((trials, L)) + 1j * rng.standard_normal((trials, L)))
        amp *= np.sqrt(powers[k] * w / 2.0)
        phase = np.exp(2j * np.pi * Ts * nu[:, :, None] * q[None, None, :])
        out[:, k, :] = np.einsum("tl,tlq->tq", amp, phase)
    if spec.freq_offset:
        out *= np.exp(2j * np.pi * spec.freq_offset * Ts * q)
    return out


def sample_realization(spec: ScatteringSpec, Ts: float, seed: int, q, n_doppler_lines: int = 64):
    """One channel draw: ``(delays, gains)`` with ``h(p, q[i]) = gains[k, i]`` at ``p = delays[k]``."""
    rng = np.random.default_rng(seed)
    gains = sample_gains(spec, Ts, rng, np.asarray(q), 1, n_doppler_lines)[0]
    return spec.delays.copy(), gains
