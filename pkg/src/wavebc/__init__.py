"""Boundary-control reconstruction of acoustic density perturbations in 1D.

The package simulates Neumann-to-Dirichlet boundary data for the acoustic
wave equation on [-1, 1] with a fourth-order FDTD scheme, builds the
time-filtered connecting operators that turn boundary data into interior
inner products, and inverts linearized measurements for the Fourier modes
of a density perturbation using analytically back-propagated boundary
controls.  A FastAPI service and a thin CLI expose experiments and
verification checks.
"""

__version__ = "0.1.0"

from .controls import (HelmholtzTarget, c3_extension, dalembert_control,
                       verify_control)
from .experiments import (ExperimentConfig, ExperimentReport, NoiseModel,
                          add_noise, emit_report, ground_truth, run_experiment)
from .grid import SimulationGrid, check_cfl
from .operators import (DifferenceQuotientMap, ReplayTraceMap,
                        SimulatedLinearizedMap, apply_connecting, apply_kdot)
from .recon import (FourierCoefficients, ReconstructionResult,
                    extract_coefficients, pairing_value, reconstruct, synthesize)
from .stencils import (StencilSpec, apply_spatial_operator,
                       fourth_order_stencils, populate_ghosts, vandermonde_coeffs)
from .traces import (BoundaryTrace, boundary_inner_product, boundary_pairing_at,
                     extend_zero, lowpass, restrict_half, time_reverse)
from .waves import (MediumSpec, SpaceTimeField, linearized_nd_map, nd_map,
                    second_time_derivative, solve_neumann_wave)

__all__ = [
    "BoundaryTrace", "DifferenceQuotientMap", "ExperimentConfig",
    "ExperimentReport", "FourierCoefficients", "HelmholtzTarget", "MediumSpec",
    "NoiseModel", "ReconstructionResult", "ReplayTraceMap",
    "SimulatedLinearizedMap", "SimulationGrid", "SpaceTimeField", "StencilSpec",
    "add_noise", "apply_connecting", "apply_kdot", "apply_spatial_operator",
    "boundary_inner_product", "boundary_pairing_at", "c3_extension",
    "check_cfl", "dalembert_control", "emit_report", "extend_zero",
    "extract_coefficients", "fourth_order_stencils", "ground_truth",
    "linearized_nd_map", "lowpass", "nd_map", "pairing_value",
    "populate_ghosts", "reconstruct", "restrict_half", "run_experiment",
    "second_time_derivative", "solve_neumann_wave", "synthesize",
    "time_reverse", "vandermonde_coeffs", "verify_control",
]
