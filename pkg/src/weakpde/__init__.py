"""Identification of evolution PDEs with spatially varying coefficients.

The pipeline: gridded space-time data -> weak-form linear system built from
B-spline test functions -> group-sparse regression over a feature dictionary ->
trimming and residual-based model selection -> coefficient curves c_k(x).
"""

from .bspline import SplineBasis, cardinal_bspline, fourier_magnitude, interior_basis, moments, periodic_basis
from .grid import GridField, GridFormatError, NoiseSpec, add_noise, noise_sigma, read_grid, write_grid
from .spectrum import TestFunctionPlan, alpha_from_frequency, critical_frequency, fit_changepoint, plan_test_functions
from .weak_system import Dictionary, FeatureGroup, WeakSystem, assemble, dictionary_preset
from .gpsp import GroupSolution, gpsp_solve, gpsp_sweep
from .model_select import SelectionReport, TrimReport, gf_trim, project_onto_basis, reconstruct_coefficients, rr_select, select_model
from .metrics import GroundTruth, e2_error, make_ground_truth, residual_error, support_scores
from .simulate import PdeSpec, SimulationError, simulate

__version__ = "0.1.0"

__all__ = [
    "SplineBasis", "cardinal_bspline", "fourier_magnitude", "interior_basis", "moments", "periodic_basis",
    "GridField", "GridFormatError", "NoiseSpec", "add_noise", "noise_sigma", "read_grid", "write_grid",
    "TestFunctionPlan", "alpha_from_frequency", "critical_frequency", "fit_changepoint", "plan_test_functions",
    "Dictionary", "FeatureGroup", "WeakSystem", "assemble", "dictionary_preset",
    "GroupSolution", "gpsp_solve", "gpsp_sweep",
    "SelectionReport", "TrimReport", "gf_trim", "project_onto_basis", "reconstruct_coefficients", "rr_select", "select_model",
    "GroundTruth", "e2_error", "make_ground_truth", "residual_error", "support_scores",
    "PdeSpec", "SimulationError", "simulate",
    "__version__",
]
