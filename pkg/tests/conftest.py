import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from popslab.channel import DelayProfile, Jakes, Lines, ScatteringSpec, exponential_profile
from popslab.lattice import LatticeConfig, SampledWaveform

settings.register_profile("default", deadline=None, max_examples=25,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


@pytest.fixture
def hexcfg():
    return LatticeConfig("hexagonal", 16, 20)


@pytest.fixture
def rectcfg():
    return LatticeConfig("rectangular", 16, 20)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def random_waveform(rng, length, start=0, Ts=1e-6, real=False):
    x = rng.standard_normal(length)
    if not real:
        x = x + 1j * rng.standard_normal(length)
    return SampledWaveform(x, Ts, start)


def desk_spec(K=4, b=0.5, fDTs=1e-3, Ts=1e-6):
    return ScatteringSpec(exponential_profile(K, b), Jakes(fDTs / Ts))


def random_spec(rng, Ts=1e-6):
    """Random separable spec: 1-4 paths (negative delays allowed), Jakes or lines, offsets."""
    K = int(rng.integers(1, 5))
    delays = tuple(sorted(rng.choice(np.arange(-3, 8), size=K, replace=False).tolist()))
    p = rng.random(K)
    powers = tuple((p / p.sum()).tolist())
    if rng.random() < 0.5:
        doppler = Jakes(float(rng.uniform(0, 0.01)) / Ts)
    else:
        f = rng.uniform(-0.01, 0.01, size=3) / Ts
        wts = rng.random(3)
        doppler = Lines(tuple(f.tolist()), tuple((wts / wts.sum()).tolist()))
    return ScatteringSpec(DelayProfile(delays, powers), doppler, int(rng.integers(-2, 3)),
                          float(rng.uniform(-0.02, 0.02)) / Ts)


# acceptance criteria record their verdicts here; printed once at the end of the run
ACCEPTANCE = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[n]
        terminalreporter.write_line(f"criterion {n:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
