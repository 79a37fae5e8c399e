"""Ping-pong SINR maximization of transmit/receive waveform pairs.

Each half step freezes one waveform, builds the useful and
interference-plus-noise kernels of the other, whitens the denominator with a
Hermitian eigendecomposition and takes the dominant eigenvector of the
whitened numerator.  The pong step reuses the same machinery on the
mirrored channel with the roles of the waveforms swapped; the receive
window of the ping step is the transmit waveform's own placement there.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg
import scipy.sparse.linalg

from .channel import ScatteringSpec, balanced_spec, reverse
from .kernels import HermitianKernel, KernelError, kernel_pair
from .lattice import LatticeConfig, SampledWaveform, Window

log = logging.getLogger(__name__)

EIG_RESIDUAL_TOL = 1e-10
CLIP_TOL = 1e-9
SIR_FLOOR = 1e-12


class SolverError(RuntimeError):
    pass


def db(x: float) -> float:
    if x == math.inf:
        return math.inf
    if x <= 0:
        return -math.inf
    return 10.0 * math.log10(x)


def from_db(x: float) -> float:
    return math.inf if x == math.inf else 10.0 ** (x / 10.0)


@dataclass
class PopsConfig:
    snr: float = math.inf  # linear Es/N0
    epsilon: float = 1e-6
    max_iters: int = 200
    init: object = "gaussian"  # or a SampledWaveform
    window_search: int = None  # half-range in samples; None means N // 2
    K_grid: tuple = (2, 3, 4, 5)
    screen_iters: int = None  # iterations per candidate during the balance search

    def __post_init__(self):
        if not self.epsilon > 0:
            raise ValueError("epsilon must be positive")
        if self.max_iters < 1:
            raise ValueError("max_iters must be at least 1")
        if not self.snr > 0:
            raise ValueError("snr must be positive")


@dataclass
class PopsResult:
    phi_opt: SampledWaveform
    psi_opt: SampledWaveform
    sinr_trace: list
    window_offset: int
    converged: bool
    iterations: int
    spec: ScatteringSpec = None
    max_eig_residual: float = 0.0

    @property
    def sinr_db(self) -> float:
        return self.sinr_trace[-1]


def canonical_phase(w: SampledWaveform) -> SampledWaveform:
    """Unit norm, largest-magnitude sample real and positive."""
    x = w.samples / w.norm
    i = int(np.argmax(np.abs(x)))
    x = x * (abs(x[i]) / x[i])
    if not np.any(x.imag):
        x = x.real
    return w.with_samples(x)


def aligned_distance(old: np.ndarray, new: np.ndarray) -> float:
    """``min_theta ||new e^{j theta} - old||``."""
    c = np.vdot(new, old)
    rot = c / abs(c) if abs(c) > 0 else 1.0
    return float(np.linalg.norm(new * rot - old))


def gaussian_init(length: int, cfg: LatticeConfig, start_index: int = 0) -> SampledWaveform:
    """Gaussian isotropic in lattice-normalized coordinates, ``exp(-pi t^2 F/T)``, unit norm."""
    if length < 1:
        raise ValueError("length must be positive")
    c = (length - 1) / 2.0
    t = (np.arange(length) - c) * cfg.Ts
    g = np.exp(-np.pi * t ** 2 * cfg.F / cfg.T)
    return SampledWaveform(g / np.linalg.norm(g), cfg.Ts, start_index)


def _noise_level(KI: HermitianKernel, snr: float, fixed_norm_sq: float) -> float:
    if math.isinf(snr):
        return 0.0
    return fixed_norm_sq / snr


def _top_eigenpair(apply, n: int, dtype, v0):
    """Largest eigenpair of the Hermitian operator ``apply`` (Lanczos, dense fallback)."""
    if n > 64:
        op = scipy.sparse.linalg.LinearOperator((n, n), matvec=apply, dtype=dtype)
        try:
            val, vec = scipy.sparse.linalg.eigsh(op, k=1, which="LA", v0=v0, tol=0.0, ncv=min(n - 1, 40),
                                                 maxiter=50 * n)
            return float(val[0]), vec[:, 0]
        except scipy.sparse.linalg.ArpackNoConvergence:
            log.debug("Lanczos did not converge; falling back to a dense solve")
    M = apply(np.eye(n, dtype=dtype))
    M = 0.5 * (M + M.conj().T)
    val, u = scipy.linalg.eigh(M, subset_by_index=[n - 1, n - 1])
    return float(val[0]), u[:, 0]


def maximize_quotient(KS: HermitianKernel, KI: HermitianKernel, noise: float, floor: float = None, x0=None):
    """Maximize ``x^H KS x / x^H (KI + noise I) x``.

    Returns ``(x, value, info)`` where ``x`` is unit norm.  ``floor`` is the
    diagonal loading used when ``noise`` is zero and ``KI`` is numerically
    singular; by default ``1e-12 * trace(KI)``.  ``x0`` is an optional starting
    guess (e.g. the previous iterate); it only affects speed.
    """
    A = KI.entries
    lam, U = scipy.linalg.eigh(A)
    tr = max(KI.trace, 0.0)
    tiny = np.finfo(float).tiny
    scale = max(np.abs(lam).max(), tiny)
    resid = np.linalg.norm(A @ U - U * lam) / max(np.linalg.norm(A), tiny)
    if resid > EIG_RESIDUAL_TOL:
        raise SolverError(f"eigendecomposition residual {resid:.3e} exceeds {EIG_RESIDUAL_TOL}")
    if lam.min() < -CLIP_TOL * max(tr, scale):
        raise KernelError(f"interference kernel has eigenvalue {lam.min():.3e} (trace {tr:.3e}); not PSD")
    lam = np.clip(lam, 0.0, None)
    if noise > 0:
        lam = lam + noise
    else:
        if floor is None:
            floor = SIR_FLOOR * tr
        if lam.min() <= CLIP_TOL * tr:
            lam = lam + floor
        if lam.min() <= 0:
            raise SolverError("interference-plus-noise kernel is singular")
    d = 1.0 / np.sqrt(lam)
    W = U * d
    WH = W.conj().T
    S = KS.entries
    dtype = np.result_type(W, S)
    n = W.shape[0]
    # whitened numerator Phi = W^H KS W, applied without forming it
    apply = lambda v: WH @ (S @ (W @ v))  # noqa: E731
    if x0 is None:
        v0 = np.ones(n, dtype=dtype)
    else:
        v0 = (U.conj().T @ np.asarray(x0)) * np.sqrt(lam)
        if not np.any(np.abs(v0) > 0):
            v0 = np.ones(n, dtype=dtype)
        v0 = (v0.real if not np.iscomplexobj(np.empty(0, dtype)) else v0).astype(dtype)
    val, u = _top_eigenpair(apply, n, dtype, v0)
    y = W @ u
    x = y / np.linalg.norm(y)
    coords = U.conj().T @ y
    info = {"eig_residual": float(resid),
            "kin_quad": float(np.sum(lam * np.abs(coords) ** 2)),
            "min_eig": float(lam.min())}
    return x, val, info


def half_step(fixed: SampledWaveform, spec: ScatteringSpec, cfg: LatticeConfig, snr: float, window,
              floor: float = None, guess: SampledWaveform = None):
    """Optimal waveform on ``window`` against ``fixed`` and its (linear) SINR.

    ``guess`` (a waveform on the same window) warm-starts the eigen-solver.
    """
    if fixed.norm == 0:
        raise ValueError("fixed waveform has zero norm")
    window = Window(*window)
    KS, KI = kernel_pair(fixed, spec, cfg, window)
    noise = _noise_level(KI, snr, fixed.norm ** 2)
    x0 = None if guess is None else guess.on_window(window.start, window.size)
    x, value, info = maximize_quotient(KS, KI, noise, floor, x0)
    out = canonical_phase(SampledWaveform(x, fixed.Ts, window.start))
    return out, value, info


def sinr_linear(phi: SampledWaveform, psi: SampledWaveform, spec: ScatteringSpec, cfg: LatticeConfig,
                snr: float) -> float:
    """``psi^H KS psi / (psi^H KI psi + ||phi||^2 ||psi||^2 / snr)`` with the window at psi's placement."""
    if phi.norm == 0 or psi.norm == 0:
        raise ValueError("waveforms must be nonzero")
    KS, KI = kernel_pair(phi, spec, cfg, (psi.start_index, len(psi)))
    s = KS.quad(psi.samples)
    i = max(KI.quad(psi.samples), 0.0)
    noise = 0.0 if math.isinf(snr) else phi.norm ** 2 * psi.norm ** 2 / snr
    den = i + noise
    if den <= 0:
        return math.inf
    return s / den


def sinr_of_pair(phi: SampledWaveform, psi: SampledWaveform, spec: ScatteringSpec, cfg: LatticeConfig,
                 snr: float) -> float:
    """SINR in dB; ``inf`` for an interference-free pair on a noiseless link."""
    return db(sinr_linear(phi, psi, spec, cfg, snr))


def zero_pad_centered(w: SampledWaveform, length: int) -> SampledWaveform:
    """``w`` embedded in the middle of ``length`` samples starting at index 0.

    Used to start a long design from a converged shorter one: a D=7T pulse
    can represent any 3T pulse exactly, so the continuation never starts
    below the short optimum.
    """
    extra = length - len(w)
    if extra < 0:
        raise ValueError(f"cannot pad {len(w)} samples into {length}")
    x = np.zeros(length, dtype=w.samples.dtype)
    x[extra // 2:extra // 2 + len(w)] = w.samples
    return SampledWaveform(x, w.Ts, 0)


def centered_offset(spec: ScatteringSpec, Nphi: int, Npsi: int) -> int:
    """Receive-window offset that centres it on the mean-delayed transmit window."""
    return int(math.floor(spec.mean_delay + (Nphi - Npsi) / 2.0 + 0.5))


def _initial_phi(pops: PopsConfig, cfg: LatticeConfig, Nphi: int) -> SampledWaveform:
    if isinstance(pops.init, SampledWaveform):
        w = pops.init
        if len(w) != Nphi:
            raise ValueError(f"initial waveform has {len(w)} samples, expected {Nphi}")
        return w.moved(0).normalized()
    if pops.init != "gaussian":
        raise ValueError(f"unknown initialization {pops.init!r}")
    return gaussian_init(Nphi, cfg)


def pops_optimize(spec: ScatteringSpec, cfg: LatticeConfig, pops: PopsConfig, Nphi: int, Npsi: int,
                  offset: int = None, max_iters: int = None) -> PopsResult:
    """Alternate ping (receive) and pong (transmit) steps until both iterates settle.

    The transmit waveform lives on ``[0, Nphi)``, the receive waveform on
    ``[offset, offset + Npsi)``.
    """
    if Nphi < 1 or Npsi < 1:
        raise ValueError("waveform lengths must be positive")
    if offset is None:
        offset = centered_offset(spec, Nphi, Npsi)
    max_iters = pops.max_iters if max_iters is None else max_iters
    rspec = reverse(spec)
    ping_win = Window(offset, Npsi)
    pong_win = Window(0, Nphi)
    phi = _initial_phi(pops, cfg, Nphi)
    psi = None
    trace = []
    worst = 0.0
    converged = False
    it = 0
    floor = None
    for it in range(1, max_iters + 1):
        psi_new, v1, info1 = half_step(phi, spec, cfg, pops.snr, ping_win, floor, guess=psi)
        phi_new, v2, info2 = half_step(psi_new, rspec, cfg, pops.snr, pong_win, floor, guess=phi)
        worst = max(worst, info1["eig_residual"], info2["eig_residual"])
        trace.extend([db(v1), db(v2)])
        e_phi = aligned_distance(phi.samples, phi_new.samples)
        e_psi = math.inf if psi is None else aligned_distance(psi.samples, psi_new.samples)
        phi, psi = phi_new, psi_new
        if e_phi <= pops.epsilon and e_psi <= pops.epsilon:
            converged = True
            break
    log.debug("pops offset=%d iters=%d sinr=%.4f dB converged=%s", offset, it, trace[-1], converged)
    return PopsResult(phi, psi, trace, offset, converged, it, spec, worst)


TIE_DB = 1e-9  # SINRs closer than this count as equal in the offset search


def _better(a: PopsResult, b: PopsResult, center: float) -> bool:
    if abs(a.sinr_db - b.sinr_db) > TIE_DB or (math.isinf(a.sinr_db) != math.isinf(b.sinr_db)):
        return a.sinr_db > b.sinr_db
    return abs(a.window_offset - center) < abs(b.window_offset - center)


def window_offset_search(spec: ScatteringSpec, cfg: LatticeConfig, pops: PopsConfig, Nphi: int, Npsi: int,
                         offsets=None) -> PopsResult:
    """Best result over receive-window offsets around the mean delay, one sample apart."""
    center = spec.mean_delay + (Nphi - Npsi) / 2.0
    if offsets is None:
        h = cfg.N // 2 if pops.window_search is None else pops.window_search
        c = centered_offset(spec, Nphi, Npsi)
        offsets = range(c - h, c + h + 1)
    best = None
    for off in offsets:
        res = pops_optimize(spec, cfg, pops, Nphi, Npsi, offset=off)
        if best is None or _better(res, best, center):
            best = res
    return best


def optimize_balanced(BdTm: float, cfg: LatticeConfig, pops: PopsConfig, Nphi: int, Npsi: int,
                      specs=None) -> PopsResult:
    """Pick the delay/Doppler split (one channel per ``K``) that yields the best SINR.

    With ``pops.screen_iters`` set, candidates are ranked on short runs at the
    centred offset and only the winner gets the full window search.
    """
    if specs is None:
        specs = balanced_spec(BdTm, cfg, pops.K_grid)
    if len(specs) == 1:
        return window_offset_search(specs[0], cfg, pops, Nphi, Npsi)
    if pops.screen_iters:
        scores = [pops_optimize(s, cfg, pops, Nphi, Npsi, max_iters=pops.screen_iters).sinr_db for s in specs]
        return window_offset_search(specs[int(np.argmax(scores))], cfg, pops, Nphi, Npsi)
    best = None
    for s in specs:
        res = window_offset_search(s, cfg, pops, Nphi, Npsi)
        if best is None or res.sinr_db > best.sinr_db:
            best = res
    return best
