"""Ping-pong waveform optimization for multicarrier links on hexagonal and rectangular lattices."""

from .channel import (DelayProfile, Jakes, Lines, ScatteringSpec, apply_sync_errors, balanced_spec,
                      bessel_j0, exponential_profile, nominal_spec, reverse, sample_realization, single_path)
from .kernels import (HermitianKernel, KernelError, brute_force_total_kernel, comb_even, comb_odd,
                      infinite_kernel, interference_kernel, kin_kernel, useful_kernel)
from .lattice import HEXAGONAL, RECTANGULAR, LatticeConfig, SampledWaveform, lattice_point, modulated_shift
from .mc_oracle import LinkEstimate, empirical_kernel, simulate_link
from .solver import (PopsConfig, PopsResult, SolverError, gaussian_init, half_step, optimize_balanced,
                     pops_optimize, sinr_of_pair, window_offset_search,
                     zero_pad_centered)

__version__ = "0.1.0"
