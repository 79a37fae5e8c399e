import math

import numpy as np
import pytest

from popslab.channel import Jakes, ScatteringSpec, exponential_profile, single_path
from popslab.kernels import useful_kernel
from popslab.lattice import LatticeConfig
from popslab.mc_oracle import empirical_kernel, reachable_points, simulate_link
from popslab.metrics import conventional_ofdm_pair
from popslab.solver import from_db, gaussian_init, sinr_of_pair

from conftest import desk_spec, random_waveform


def test_rejects_few_trials():
    phi, psi, cfg = conventional_ofdm_pair(16, 4)
    with pytest.raises(ValueError):
        simulate_link(phi, psi, single_path(), cfg, 10.0, 99, 0)


def test_noise_only():
    phi, psi, cfg = conventional_ofdm_pair(16, 4)
    snr = 10.0
    est = simulate_link(phi, psi, desk_spec(), cfg, snr, 4000, 3, transmit=False)
    assert est.P_S == 0.0 and est.P_I == 0.0
    N0 = phi.norm ** 2 / snr
    # |<psi, n>|^2 is exponential with mean N0 ||psi||^2
    assert abs(est.P_N - N0) <= 4 * N0 / math.sqrt(4000)


def test_ofdm_identity_channel_has_no_interference():
    phi, psi, cfg = conventional_ofdm_pair(16, 4)
    est = simulate_link(phi, psi, single_path(), cfg, math.inf, 300, 1)
    # only rounding noise is left
    assert est.P_I <= 1e-24 and est.P_N == 0.0
    assert est.sinr_dB > 200


def test_deterministic_for_fixed_seed():
    cfg = LatticeConfig("hexagonal", 16, 20)
    phi = gaussian_init(40, cfg)
    a = simulate_link(phi, phi, desk_spec(), cfg, 100.0, 300, 42)
    b = simulate_link(phi, phi, desk_spec(), cfg, 100.0, 300, 42)
    c = simulate_link(phi, phi, desk_spec(), cfg, 100.0, 300, 43)
    assert a == b and a != c
    assert a.ci95_dB > 0


def test_reachable_points_cover_every_overlap(rng):
    cfg = LatticeConfig("hexagonal", 16, 20)
    phi = random_waveform(rng, 40)
    spec = desk_spec()
    pts = set(reachable_points(phi, spec, cfg, (3, 40)))
    from popslab.lattice import modulated_shift
    for m in range(cfg.Q):
        for n in range(-8, 9):
            c = modulated_shift(phi, cfg, m, n)
            hits = any(c.start_index + p < 43 and c.end_index + p > 3 for p in spec.delays)
            assert ((m, n) in pts) == hits


def test_hexagonal_sinr_agrees_with_kernels():
    cfg = LatticeConfig("hexagonal", 16, 20)
    spec = ScatteringSpec(exponential_profile(3), Jakes(2.5e3))
    phi = gaussian_init(60, cfg)
    snr = from_db(15)
    est = simulate_link(phi, phi.moved(1), spec, cfg, snr, 3000, 9)
    ref = sinr_of_pair(phi, phi.moved(1), spec, cfg, snr)
    assert abs(est.sinr_dB - ref) <= max(est.ci95_dB, 0.05) * 1.5


def test_empirical_kernel_flat_channel(rng):
    cfg = LatticeConfig("rectangular", 16, 20)
    phi = random_waveform(rng, 12)
    K = empirical_kernel(phi, single_path(), cfg, (0, 12), 2000, 8)
    ref = np.outer(phi.samples, phi.samples.conj())
    # each trial is |h|^2 phi phi^H, so the average is a scalar multiple of phi phi^H
    scale = K.entries[0, 0] / ref[0, 0]
    np.testing.assert_allclose(K.entries, scale * ref, atol=1e-12 * np.abs(ref).max())
    assert abs(scale - 1) < 5 / math.sqrt(2000)
    np.testing.assert_array_equal(K.entries, K.entries.conj().T)


def test_empirical_kernel_converges_to_useful_kernel():
    cfg = LatticeConfig("hexagonal", 16, 20)
    phi = gaussian_init(20, cfg)
    spec = desk_spec(K=3, fDTs=1e-2)
    trials = 20_000
    K = empirical_kernel(phi, spec, cfg, (0, 22), trials, 4)
    ref = useful_kernel(phi, spec, (0, 22))
    assert np.max(np.abs(K.entries - ref.entries)) < 5 / math.sqrt(trials) * phi.norm ** 2
