"""Facilitated asymmetric exclusion on rings and windows.

Kinetic Monte Carlo for the F-ASEP and the plain ASEP, exact small-ring
solvers, the closed-form F-TASEP final measures, the substitution coupling
with the ASEP, and the statistical harness that checks them against each
other.
"""

__version__ = "0.1.0"

from .coupling import (SubstitutionMap, apply_substitution, cylinder_probability,
                       invert_substitution, mapped_measure_weight, run_coupled,
                       sample_uniform_G_ring, true_particles)
from .dynamics import (ClockScheme, Model, RateParams, RunRecord, insulated_window_experiment,
                       run_asep_for_time, run_for_time, run_to_frozen, sample_bernoulli_window,
                       sample_uniform_ring)
from .errors import *  # noqa: F401,F403
from .exact import (ExactDistribution, absorption_distribution, build_generator,
                    enumerate_states, marginal_at_time, stationary_distribution)
from .lattice import (LatticeConfig, Topology, component_count, components, density,
                      double_zero_bonds, is_frozen, is_no_adjacent_holes, particle_count)
from .stats import (EmpiricalDistribution, TestVerdict, chi_square_gof, cylinder_counts,
                    gap_histogram, tv_distance)
from .tasep import (catalan, final_config_tasep, gap_law, height_profile, record_set,
                    ring_final_measure, ring_final_weight)
