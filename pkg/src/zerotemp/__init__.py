"""Zero-temperature limits of Gibbs measures on Markov shifts.

Finite-range potentials on (truncated) topologically mixing Markov shifts:
transfer-operator eigendata at inverse temperature beta, the max-plus
(ergodic optimization) limit, the deviation function and beta sweeps that
track the large deviation asymptotics of the Gibbs measures.
"""
from .deviation import (DeviationResult, deviation_report, i_of_eventually_periodic,
                        inf_deviation_on_cylinder, r_plus_weights, zero_level_check)
from .graph import ContextGraph, build_context_graph
from .kernels import BACKEND
from .maxplus import (MaxPlusSolution, calibrated_subaction, mane_kernel, max_mean_cycle,
                      solve_maxplus)
from .potential import (CountableModel, Potential, birkhoff_sum, geometric_envelope,
                        linear_symbol_penalty, make_potential, truncate, truncation_level,
                        walters_modulus)
from .shift import (MarkovShift, build_shift, full_shift, is_topologically_mixing,
                    primitivity_witness)
from .sweep import Instance, SweepRecord, limit_estimates, run_sweep, sweep_audit
from .transfer import (GibbsChain, RpfSolution, cylinder_log_measure, gibbs_chain,
                       gurevich_pressure_periodic, rpf_solve)

__version__ = "0.1.0"

__all__ = [
    "BACKEND", "ContextGraph", "CountableModel", "DeviationResult", "GibbsChain", "Instance",
    "MarkovShift", "MaxPlusSolution", "Potential", "RpfSolution", "SweepRecord",
    "birkhoff_sum", "build_context_graph", "build_shift", "calibrated_subaction",
    "cylinder_log_measure", "deviation_report", "full_shift", "geometric_envelope",
    "gibbs_chain", "gurevich_pressure_periodic", "i_of_eventually_periodic",
    "inf_deviation_on_cylinder", "is_topologically_mixing", "limit_estimates",
    "linear_symbol_penalty", "make_potential", "mane_kernel", "max_mean_cycle",
    "primitivity_witness", "r_plus_weights", "rpf_solve", "run_sweep", "solve_maxplus",
    "sweep_audit", "truncate", "truncation_level", "walters_modulus", "zero_level_check",
]
