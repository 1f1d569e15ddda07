"""Numerical toolkit for chordal Loewner evolution.

Synthesize traces from driving functions, invert curves back to drivers,
sample SLE paths, measure curve distances, and certify that driver
closeness forces trace closeness.
"""

from .core import (Trace, chain_from_driver, compute_trace, delta_modulus,
                   hull_bounds_check, restarted_trace)
from .driver import (Driver, HolderProfile, class_d_profile, local_holder_norm,
                     make_driver, oscillation, phi, sample_brownian_driver,
                     zero_driver)
from .errors import (DomainError, InputError, LoewnerError,
                     SelfIntersectionError, ToleranceError)
from .flow import (SwallowReport, calibrate_interval_constant, forward_flow,
                   map_compare_bound, reverse_swallow_time, reversed_driver,
                   swallow_time_ode, swallowed_interval)
from .grid import TimeGrid, uniform_grid, union_grid
from .metrics import AlignmentResult, strong_distance, sup_distance
from .sle import (SlePath, batch_sle_traces, epsilon_schedule,
                  min_imag_restarted, sample_sle, window_min_imag)
from .slitmap import SlitCell, SlitMapChain, eval_chain, tilted_cell, vertical_cell
from .support import (INTERVAL_CONSTANT, CertificateReport, ExperimentReport,
                      FixedIntervalResult, GammaInHResult, binomial_ci,
                      certify_closeness, christmas_tree,
                      construct_admissible_perturbation,
                      fixed_interval_bound_check, gamma_in_H_check,
                      support_probe, wong_zakai_experiment)
from .zipper import (RawCurve, hcap, hcap_continuity_check, reparam_by_hcap,
                     zip_curve)

__version__ = "0.1.0"
