"""Time-frequency lattice geometry and lattice-shifted waveform copies.

Waveforms are finite sample vectors anchored on a global sample grid by
``start_index``.  A lattice copy is the same samples moved to a new start
index and modulated by ``exp(2j*pi*m*q/Q)`` where ``q`` is the *global*
sample index.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import NamedTuple

import numpy as np

HEXAGONAL = "hexagonal"
RECTANGULAR = "rectangular"
LATTICE_KINDS = (HEXAGONAL, RECTANGULAR)


@dataclass(frozen=True)
class LatticeConfig:
    """Lattice kind plus the integers that fix its geometry.

    ``Q`` subcarriers, ``N`` samples per symbol period and sampling period
    ``Ts`` (seconds).  Hexagonal lattices shift odd subcarriers by half a
    symbol, hence ``N`` (and ``Q``, for the subcarrier index to wrap onto the
    same lattice) must be even.
    """

    kind: str
    Q: int
    N: int
    Ts: float = 1e-6

    def __post_init__(self):
        if self.kind not in LATTICE_KINDS:
            raise ValueError(f"unknown lattice kind {self.kind!r}")
        if self.Q < 1 or self.N < 1:
            raise ValueError("Q and N must be positive")
        if self.N <= self.Q:
            raise ValueError(f"need N > Q for an undersampled lattice (Q={self.Q}, N={self.N})")
        if self.Ts <= 0:
            raise ValueError("Ts must be positive")
        if self.kind == HEXAGONAL and (self.N % 2 or self.Q % 2):
            raise ValueError(f"hexagonal lattice needs even N and Q (Q={self.Q}, N={self.N})")

    @property
    def T(self) -> float:
        return self.N * self.Ts

    @property
    def F(self) -> float:
        return 1.0 / (self.Q * self.Ts)

    @property
    def FT(self) -> Fraction:
        return Fraction(self.N, self.Q)

    @property
    def density(self) -> Fraction:
        return Fraction(self.Q, self.N)

    @property
    def cp(self) -> int:
        return self.N - self.Q

    @property
    def is_hexagonal(self) -> bool:
        return self.kind == HEXAGONAL


@dataclass(frozen=True, eq=False)
class SampledWaveform:
    samples: np.ndarray
    Ts: float
    start_index: int = 0

    def __post_init__(self):
        s = np.array(self.samples, dtype=complex).reshape(-1)
        if s.size < 1:
            raise ValueError("waveform needs at least one sample")
        s.setflags(write=False)
        object.__setattr__(self, "samples", s)
        object.__setattr__(self, "start_index", int(self.start_index))

    def __len__(self) -> int:
        return self.samples.size

    @property
    def end_index(self) -> int:
        """One past the last global index."""
        return self.start_index + self.samples.size

    @property
    def duration(self) -> float:
        return self.samples.size * self.Ts

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.samples))

    def with_samples(self, samples) -> "SampledWaveform":
        return SampledWaveform(samples, self.Ts, self.start_index)

    def moved(self, start_index: int) -> "SampledWaveform":
        return SampledWaveform(self.samples, self.Ts, start_index)

    def normalized(self) -> "SampledWaveform":
        n = self.norm
        if n == 0:
            raise ValueError("cannot normalize a zero waveform")
        return self.with_samples(self.samples / n)

    def on_window(self, start: int, size: int) -> np.ndarray:
        """Samples seen through the window ``[start, start+size)``; zero outside the support."""
        out = np.zeros(size, dtype=complex)
        lo = max(start, self.start_index)
        hi = min(start + size, self.end_index)
        if lo < hi:
            out[lo - start:hi - start] = self.samples[lo - self.start_index:hi - self.start_index]
        return out


class Window(NamedTuple):
    start: int
    size: int

    @property
    def stop(self) -> int:
        return self.start + self.size


def lattice_point(cfg: LatticeConfig, m: int, n: int) -> tuple[int, int]:
    """Time shift in samples and subcarrier index of lattice point ``(m, n)``."""
    if cfg.is_hexagonal:
        return n * cfg.N + m * (cfg.N // 2), m
    return n * cfg.N, m


def unit_roots(Q: int) -> np.ndarray:
    """``exp(2j*pi*r/Q)`` for r = 0..Q-1, with the exactly representable ones snapped."""
    r = np.arange(Q)
    z = np.exp(2j * np.pi * r / Q)
    z[0] = 1.0
    if Q % 2 == 0:
        z[Q // 2] = -1.0
    if Q % 4 == 0:
        z[Q // 4] = 1j
        z[3 * Q // 4] = -1j
    return z


def modulation(Q: int, m: int, q: np.ndarray) -> np.ndarray:
    """Phase factors ``exp(2j*pi*m*q/Q)`` evaluated through integer residues."""
    return unit_roots(Q)[(int(m) % Q) * np.asarray(q, dtype=np.int64) % Q]


def modulated_shift(w: SampledWaveform, cfg: LatticeConfig, m: int, n: int) -> SampledWaveform:
    if w.Ts != cfg.Ts:
        raise ValueError("waveform and lattice sampling periods differ")
    shift, _ = lattice_point(cfg, m, n)
    start = w.start_index + shift
    q = np.arange(start, start + len(w))
    return SampledWaveform(w.samples * modulation(cfg.Q, m, q), w.Ts, start)
