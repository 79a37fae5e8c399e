import numpy as np
import pytest
from hypothesis import given, strategies as st

from popslab.channel import DelayProfile, Jakes, Lines, ScatteringSpec, exponential_profile, reverse, single_path
from popslab.kernels import (HermitianKernel, KernelError, brute_force_total_kernel, comb_even, comb_odd,
                             correlation_kernel, infinite_kernel, interference_kernel, kin_kernel, shift_range,
                             useful_kernel)
from popslab.lattice import LatticeConfig, SampledWaveform
from popslab.metrics import conventional_ofdm_pair

from conftest import desk_spec, random_spec, random_waveform

Ts = 1e-6


def ones_corr(size):
    return HermitianKernel(np.ones((size, size)))


def test_even_comb_example():
    E = comb_even(4, ones_corr(5)).entries
    lag = np.subtract.outer(np.arange(5), np.arange(5))
    np.testing.assert_array_equal(E, np.where(lag % 2 == 0, 2.0, 0.0))


def test_odd_comb_example():
    O = comb_odd(4, ones_corr(5)).entries
    lag = np.abs(np.subtract.outer(np.arange(5), np.arange(5)))
    expect = np.select([lag % 4 == 0, lag % 4 == 2], [2.0, -2.0], 0.0)
    np.testing.assert_array_equal(O, expect)


def test_combs_equal_geometric_sums():
    Q = 8
    corr = ones_corr(17)
    E, O = comb_even(Q, corr).entries, comb_odd(Q, corr).entries
    for k in range(-8, 9):
        d = np.arange(Q // 2)
        even = np.exp(4j * np.pi * d * k / Q).sum()
        odd = np.exp(2j * np.pi * (2 * d + 1) * k / Q).sum()
        p, q = (k, 0) if k >= 0 else (0, -k)
        assert abs(E[p, q] - even) < 1e-12
        assert abs(O[p, q] - odd) < 1e-12
    total = E + O
    lag = np.subtract.outer(np.arange(17), np.arange(17))
    np.testing.assert_allclose(total, np.where(lag % Q == 0, Q, 0.0), atol=1e-12)


def test_combs_reject_odd_Q():
    with pytest.raises(ValueError):
        comb_even(5, ones_corr(3))
    with pytest.raises(ValueError):
        comb_odd(7, ones_corr(3))


@given(fDTs=st.floats(0, 0.2))
def test_comb_kernels_hermitian(fDTs):
    spec = ScatteringSpec(exponential_profile(2, 0.5), Jakes(fDTs / Ts), freq_offset=0.01 / Ts)
    corr = correlation_kernel(spec, Ts, (0, 9))
    for K in (comb_even(6, corr), comb_odd(6, corr)):
        assert np.allclose(K.entries, K.entries.conj().T, atol=1e-15)


def test_useful_kernel_identity_channel(rng):
    w = random_waveform(rng, 12, start=4)
    KS = useful_kernel(w, single_path(), (4, 12))
    np.testing.assert_allclose(KS.entries, np.outer(w.samples, w.samples.conj()), atol=1e-13)


def test_useful_kernel_trace_identity(rng):
    w = random_waveform(rng, 20)
    spec = desk_spec(K=4, fDTs=0.03)
    window = (5, 18)
    KS = useful_kernel(w, spec, window)
    expect = sum(pw * np.sum(np.abs(w.moved(int(p)).on_window(*window)) ** 2)
                 for p, pw in zip(spec.delays, spec.powers))
    assert KS.trace == pytest.approx(expect, rel=1e-12)


def test_useful_kernel_rejects_disjoint_window(rng):
    w = random_waveform(rng, 10)
    with pytest.raises(KernelError):
        useful_kernel(w, single_path(), (100, 10))


@pytest.mark.parametrize("kind", ["hexagonal", "rectangular"])
def test_infinite_kernel_matches_brute_force(rng, kind):
    cfg = LatticeConfig(kind, 16, 20)
    w = random_waveform(rng, 60)
    spec = desk_spec()
    window = (1, 60)
    fast = infinite_kernel(w, spec, cfg, window).entries
    slow = brute_force_total_kernel(w, spec, cfg, window).entries
    assert np.max(np.abs(fast - slow)) <= 1e-10 * w.norm ** 2


def test_brute_force_origin_only_is_useful_kernel(rng, hexcfg):
    w = random_waveform(rng, 20)
    spec = desk_spec(K=3)
    bf = brute_force_total_kernel(w, spec, hexcfg, (0, 22), mn_range=[(0, 0)])
    np.testing.assert_allclose(bf.entries, useful_kernel(w, spec, (0, 22)).entries, atol=1e-13)


@pytest.mark.parametrize("kind", ["hexagonal", "rectangular"])
def test_truncation_is_exact(rng, kind):
    cfg = LatticeConfig(kind, 16, 20)
    w = random_waveform(rng, 40)
    spec = desk_spec()
    window = (2, 40)
    auto = infinite_kernel(w, spec, cfg, window).entries
    wide = infinite_kernel(w, spec, cfg, window, n_range=range(-30, 31)).entries
    assert np.array_equal(auto, wide)


def test_shift_range_covers_exactly_the_overlaps():
    from popslab.lattice import Window
    win = Window(10, 7)
    r = shift_range(0, 5, win, 4, base=1)
    for n in range(-20, 20):
        s = 0 + 1 + 4 * n
        touches = s < win.stop and s + 5 > win.start
        assert (n in r) == touches


@pytest.mark.parametrize("kind", ["hexagonal", "rectangular"])
def test_interference_kernel_is_psd(rng, kind):
    cfg = LatticeConfig(kind, 16, 20)
    w = random_waveform(rng, 60)
    KI = interference_kernel(w, desk_spec(), cfg, (2, 60))
    assert np.linalg.eigvalsh(KI.entries).min() >= -1e-9 * KI.trace


def test_ofdm_pair_has_no_interference_on_identity_channel():
    phi, psi, cfg = conventional_ofdm_pair(16, 4)
    win = (psi.start_index, len(psi))
    total = brute_force_total_kernel(phi, single_path(), cfg, win)
    KS = useful_kernel(phi, single_path(), win)
    assert abs((total - KS).quad(psi.samples)) <= 1e-12
    KI = interference_kernel(phi, single_path(), cfg, win)
    assert abs(KI.quad(psi.samples)) <= 1e-12


@pytest.mark.parametrize("kind", ["hexagonal", "rectangular"])
def test_duality(kind):
    rng = np.random.default_rng(99)
    cfg = LatticeConfig(kind, 16, 20)
    for _ in range(10):
        phi = random_waveform(rng, 40, 0)
        psi = random_waveform(rng, 40, int(rng.integers(-5, 6)))
        spec = random_spec(rng)
        KS = useful_kernel(phi, spec, (psi.start_index, len(psi)))
        KI = interference_kernel(phi, spec, cfg, (psi.start_index, len(psi)), KS)
        KSd = useful_kernel(psi, reverse(spec), (phi.start_index, len(phi)))
        KId = interference_kernel(psi, reverse(spec), cfg, (phi.start_index, len(phi)), KSd)
        assert KS.quad(psi.samples) == pytest.approx(KSd.quad(phi.samples), rel=1e-10)
        assert KI.quad(psi.samples) == pytest.approx(KId.quad(phi.samples), rel=1e-10)


@given(c=st.complex_numbers(min_magnitude=0.1, max_magnitude=10))
def test_kernels_are_quadratic(c):
    rng = np.random.default_rng(3)
    cfg = LatticeConfig("hexagonal", 16, 20)
    w = random_waveform(rng, 20)
    spec = desk_spec(K=3)
    a = interference_kernel(w, spec, cfg, (0, 20)).entries
    b = interference_kernel(w.with_samples(c * w.samples), spec, cfg, (0, 20)).entries
    np.testing.assert_allclose(b, abs(c) ** 2 * a, atol=1e-12 * abs(c) ** 2 * np.abs(a).max())


def test_kin_kernel():
    KI = HermitianKernel(np.zeros((3, 3)))
    assert kin_kernel(KI, np.inf, 1.0) is KI
    np.testing.assert_allclose(kin_kernel(KI, 10.0, 1.0).entries, 0.1 * np.eye(3))
    with pytest.raises(ValueError):
        kin_kernel(KI, 0.0, 1.0)
    rng = np.random.default_rng(0)
    for _ in range(5):
        A = rng.standard_normal((6, 6)) + 1j * rng.standard_normal((6, 6))
        KI = HermitianKernel(A @ A.conj().T)
        assert np.linalg.eigvalsh(kin_kernel(KI, 100.0, 2.0).entries).min() >= 0.99 * 2.0 / 100


def test_hermitian_kernel_windows_must_match():
    a = HermitianKernel(np.eye(2), 0)
    b = HermitianKernel(np.eye(2), 1)
    with pytest.raises(ValueError):
        a + b
