"""Driven dissipative qubit-magnon simulator.

Builds the rotating-frame Jaynes-Cummings Hamiltonian of a qubit coupled to
a truncated magnon mode, solves the Lindblad master equation for its steady
state (directly and by Monte Carlo wave-function unraveling), computes the
equal-time correlation g2(0), and sweeps parameter grids to reproduce the
blockade and bunching maps. All rates are in units of gamma = 2*pi x 1 MHz.
"""

from ._version import __version__
from .hilbert import Operator, SpaceDims, StateVector, expectation
from .liouville import (
    DensityMatrix,
    Liouvillian,
    build_liouvillian,
    converged_cutoff,
    evolve,
    steady_state,
    steady_state_for,
    trace_distance,
)
from .model import (
    CollapseOp,
    SystemParams,
    build_collapse_ops,
    build_hamiltonian,
    dressed_spectrum,
    drive_strength_from_power,
    effective_coupling,
    thermal_occupation,
)
from .observables import classify, g2_zero, magnon_marginal, magnon_stats
from .sweep import AxisSpec, CutoffPolicy, SweepSpec, figure_preset, run_sweep
from .trajectory import TrajectoryConfig, TrajectoryEstimate, ensemble_g2, run_trajectory

__all__ = [
    "__version__",
    "SpaceDims",
    "Operator",
    "StateVector",
    "expectation",
    "SystemParams",
    "CollapseOp",
    "build_hamiltonian",
    "build_collapse_ops",
    "thermal_occupation",
    "effective_coupling",
    "drive_strength_from_power",
    "dressed_spectrum",
    "DensityMatrix",
    "Liouvillian",
    "build_liouvillian",
    "steady_state",
    "steady_state_for",
    "evolve",
    "converged_cutoff",
    "trace_distance",
    "g2_zero",
    "classify",
    "magnon_marginal",
    "magnon_stats",
    "TrajectoryConfig",
    "TrajectoryEstimate",
    "run_trajectory",
    "ensemble_g2",
    "AxisSpec",
    "CutoffPolicy",
    "SweepSpec",
    "run_sweep",
    "figure_preset",
]
