import math

import numpy as np
import pytest

from popslab import metrics
from popslab.channel import DelayProfile, ScatteringSpec, nominal_spec, single_path
from popslab.lattice import LatticeConfig, SampledWaveform
from popslab.solver import PopsConfig, from_db, gaussian_init, sinr_linear


def test_ofdm_pair_shape():
    phi, psi, cfg = metrics.conventional_ofdm_pair(16, 4)
    assert cfg.kind == "rectangular" and cfg.N == 20
    assert len(phi) == 20 and phi.start_index == 0 and np.ptp(phi.samples) == 0
    assert len(psi) == 16 and psi.start_index == 4 and np.ptp(psi.samples) == 0
    assert phi.norm == pytest.approx(1) and psi.norm == pytest.approx(1)


def test_ofdm_cp_absorbs_delay_spread():
    phi, psi, cfg = metrics.conventional_ofdm_pair(16, 4)
    spec = ScatteringSpec(DelayProfile((0, 2, 4), (0.5, 0.3, 0.2)))
    from popslab.kernels import interference_kernel
    KI = interference_kernel(phi, spec, cfg, (psi.start_index, len(psi)))
    assert abs(KI.quad(psi.samples)) <= 1e-12
    assert sinr_linear(phi, psi, spec, cfg, from_db(20)) == pytest.approx(from_db(20) * 16 / 20, rel=1e-12)


def test_rectangle_psd():
    N, Q = 160, 128
    p = metrics.psd(SampledWaveform(np.ones(N), 1e-6), Q, oversample=64)
    # nulls of an N-sample rectangle sit at multiples of (Q/N) F
    band = (p.freq > Q / N * 1.05) & (p.freq < 2 * Q / N * 0.95)
    assert p.psd_dB[band].max() == pytest.approx(-13.26, abs=0.05)
    assert p.psd_dB.max() == 0.0 and p.freq[np.argmax(p.psd_dB)] == 0.0


def test_psd_parseval(rng):
    w = SampledWaveform(rng.standard_normal(37) + 1j * rng.standard_normal(37), 1e-6)
    p = metrics.psd(w, 16, oversample=8)
    assert p.linear.mean() == pytest.approx(w.norm ** 2 / len(w), rel=1e-12)


def test_aggregate_psd_symmetric_for_symmetric_pulse():
    cfg = LatticeConfig("hexagonal", 16, 20)
    g = gaussian_init(60, cfg)
    agg = metrics.aggregate_psd(g, cfg, n_subcarriers=9, oversample=16)
    L = agg.freq.size
    mirrored = agg.linear[(L - np.arange(L)) % L]
    np.testing.assert_allclose(agg.linear, mirrored, rtol=1e-10)
    assert agg.band_edge == 4.5
    with pytest.raises(ValueError):
        metrics.aggregate_psd(g, cfg, n_subcarriers=17)


def test_aggregate_psd_in_band_ripple_of_optimized_pulse():
    pair = metrics.design_pair("hexagonal", 16, 20, 1e-2, 3, PopsConfig(K_grid=(3,)))
    agg = metrics.aggregate_psd(pair.phi, pair.lattice, n_subcarriers=9, oversample=16)
    inband = np.abs(agg.freq) <= 3.5
    assert np.ptp(agg.psd_dB[inband]) < 3.0


def test_oob_leakage_monotone():
    p = metrics.psd(SampledWaveform(np.ones(20), 1e-6), 16, oversample=16)
    vals = [metrics.oob_leakage(p, o) for o in np.linspace(0, 7, 29)]
    assert all(b <= a for a, b in zip(vals, vals[1:]))
    with pytest.raises(ValueError):
        metrics.oob_leakage(p, 100.0)


def _pair(kind="hexagonal"):
    cfg = LatticeConfig(kind, 16, 20)
    return metrics.design_pair(kind, 16, 20, 1e-2, 2, PopsConfig(max_iters=10, K_grid=(3,)))


def test_sensitivity_zero_error_is_unperturbed():
    pair = _pair()
    res = metrics.sensitivity_sweep({"hex": pair}, "freq", [-0.05, 0.0, 0.05])
    assert res.series["hex"][1] == pair.sinr(snr=math.inf)
    assert res.series["hex"][1] == pair.sir_dB
    t = metrics.sensitivity_sweep({"hex": pair}, "time", [-2, 0, 2])
    assert t.series["hex"][1] == pair.sir_dB
    assert t.axis_name == "dtau_over_Ts"
    with pytest.raises(ValueError):
        metrics.perturbed_sir(pair, "time", 0.5)


def test_codebook_and_envelope():
    cfg = LatticeConfig("hexagonal", 16, 20)
    cb = metrics.build_codebook([1e-2, 1e-4], cfg, 2, PopsConfig(max_iters=10))
    assert [e.design_BdTm for e in cb.entries] == [1e-4, 1e-2]
    m = metrics.mismatch_matrix(cb, [1e-4, 1e-3, 1e-2])
    env = np.array(m.series["envelope"])
    for name, vals in m.series.items():
        assert np.all(env >= np.array(vals))
    with pytest.raises(ValueError):
        metrics.Codebook(list(reversed(cb.entries)))


def test_time_reverse_match():
    rng = np.random.default_rng(2)
    x = rng.standard_normal(30) + 1j * rng.standard_normal(30)
    phi = SampledWaveform(x, 1e-6)
    psi = SampledWaveform(np.concatenate([[0, 0], np.conj(x[::-1]) * 1j]), 1e-6, 5)
    assert metrics.time_reverse_match(phi, psi) == pytest.approx(1.0, abs=1e-12)
    assert metrics.time_reverse_match(phi, SampledWaveform(rng.standard_normal(30), 1e-6)) < 0.9


def test_sweep_shapes_and_determinism():
    pops = PopsConfig(max_iters=4, K_grid=(3,))
    a = metrics.sweep_ft(16, 1e-2, [1], [1.25, 1.5], pops=pops)
    b = metrics.sweep_ft(16, 1e-2, [1], [1.25, 1.5], pops=pops)
    assert set(a.series) == {"hexagonal_D1", "rectangular_D1", "ofdm"}
    assert all(len(v) == 2 for v in a.series.values())
    assert a.series == b.series


def test_sweep_result_validates_lengths():
    with pytest.raises(ValueError):
        metrics.SweepResult("x", [1, 2], {"s": [1.0]})


def test_ofdm_design_uses_nominal_balance():
    d = metrics.ofdm_design(16, 4, 1e-2)
    assert d.spec == nominal_spec(1e-2, d.lattice)
    assert math.isfinite(d.sir_dB)
