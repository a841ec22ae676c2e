"""Dirac quantum walks on triangular and honeycomb lattices."""

from .coins import CoinAngles, u2_from_angles
from .dispersion import GapReport, WaveVector, dispersion_at, min_gap, omega, scan_bz, walk_matrix
from .experiments import ExperimentConfig, InitialCondition, bloch_report, estimate_period, run_experiment
from .gauge import ElectricField, PhaseChange, UniformElectricField, gauge_transform
from .kernels import BACKEND
from .lattice import Family, LatticeSpec, SiteIndex, SpinorField, neighbor, position
from .walks import WalkKind, WalkSpec, build_walk, evolve, step

__all__ = [
    "CoinAngles", "u2_from_angles", "Family", "LatticeSpec", "SiteIndex", "SpinorField",
    "neighbor", "position", "WalkKind", "WalkSpec", "build_walk", "evolve", "step",
    "GapReport", "WaveVector", "dispersion_at", "min_gap", "omega", "scan_bz", "walk_matrix",
    "ElectricField", "PhaseChange", "UniformElectricField", "gauge_transform",
    "ExperimentConfig", "InitialCondition", "bloch_report", "estimate_period", "run_experiment",
    "BACKEND",
]
__version__ = "0.1.0"
