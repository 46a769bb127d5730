"""Simulation and measurement of statistically self-similar random measures.

Cascades and random Riesz products on {0, ..., b-1}^N, their scaling
functions and Legendre spectra, neighbour-windowed singularity sets and
the growth speed of those sets along the shifted copies mu^(j).
"""
__version__ = "0.1.0"

from .symbolic import (  # noqa: E402
    Word, as_word, boundary_words, delta, index_of, neighbors, word_of,
)
from .measures import (  # noqa: E402
    CascadeMeasure, DenseMeasure, RieszMeasure, WeightSpec, dense_table, generate_cascade,
    generate_riesz, riesz_mass, shift, verify_quasi_bernoulli,
)
from .spectrum import (  # noqa: E402
    EpsilonSchedule, LegendreResult, ScalingSample, TiltedMeasure, count_Nn, interval_J,
    legendre, markov_count_bound, q_grid, scaling_sample, tau_j, tau_oracle, tau_prime,
    tilted_measure,
)
from .singularity import (  # noqa: E402
    GrowthSpeedReport, WindowParams, boundary_ratio_diagnostic, growth_speed,
    growth_speed_prime, membership_certificate, s_n_statistic, window_pass,
)
