"""Bloch-vector dynamics of the thermal Jaynes-Cummings model at high precision.

The package evaluates the thermal series L1, L3, L4 with certified truncation,
samples Bloch trajectories on exact discrete grids, and provides the
number-theoretic, fluid-analogy and spectral tools built on them.
"""
from .bloch import (
    BlochState,
    SampleGrid,
    Viewport,
    evolve,
    find_self_intersections,
    sample_trajectory,
    sample_trajectory_fast,
)
from .diophantine import (
    QuadraticIrrational,
    build_candidate_set,
    continued_fraction,
    convergent,
    convergents,
    dirichlet_search,
    quality,
    third_order_filter,
)
from .fastpath import FastSeries
from .fluid import SingularTimeError, coefficients, velocity
from .precision import (
    ConfigurationError,
    InsufficientPrecisionError,
    PrecisionContext,
    Surd,
    cos_hp,
    reduce_mod_2pi,
    required_digits,
    sin_hp,
    with_precision,
)
from .series import (
    ThermalParams,
    TruncationPolicy,
    approx_low_temp,
    eval_detuned,
    eval_L1,
    eval_L3,
    eval_L4,
    evaluate,
    truncation_index,
)
from .spectra import (
    SpectrumParams,
    dft_closed,
    dft_direct,
    find_peaks,
    fluorescence_signal,
    spectrum_closed,
    spectrum_numeric,
)
from .zerocross import qpi_scan, scan, scatter_sweep, schedule

__version__ = "0.1.0"
