"""Velocity-series quantum friction between two moving ground-state atoms."""

from .dynamics import (
    ForceTerm,
    RegimeReport,
    d_vector,
    d_vector_numeric,
    force_closed,
    force_direct,
    force_order,
    force_series,
    gain_angle,
    gain_polynomial,
    kernel_moment,
    regime_check,
)
from .errors import QfricError
from .green_tensor import (
    KAPPA,
    GreenContraction,
    KappaSet,
    fit_kappa,
    green,
    green_contraction_closed,
    green_contraction_numeric,
    green_gradient,
    symmetry_basis,
)
from .macroscopic import (
    MediumConfig,
    angular_average,
    angular_average_numeric,
    half_space_closed,
    half_space_force,
    pair_force_uniform,
)
from .response import (
    CorrelationFactor,
    LorentzModel,
    Temperature,
    Transition,
    alpha,
    alpha_derivative,
    alpha_I_deriv_zero,
    alpha_time,
    eta_thermal,
    eta_time,
    eta_time_residues,
    lambda_closed,
    lambda_n,
    lambda_static_imaginary_axis,
    memory_kernel,
)
from .trajectory import (
    PerturbedLine,
    SampledTrajectory,
    Trajectory,
    UniformLine,
    read_trajectory,
    static,
    uniform_line,
    write_trajectory,
)
from .work import WorkReport, closest_approach, scattering_window, work_order, work_sobolev_form

__version__ = "0.1.0"

__all__ = [
    "CorrelationFactor",
    "ForceTerm",
    "GreenContraction",
    "KAPPA",
    "KappaSet",
    "LorentzModel",
    "MediumConfig",
    "PerturbedLine",
    "QfricError",
    "RegimeReport",
    "SampledTrajectory",
    "Temperature",
    "Trajectory",
    "Transition",
    "UniformLine",
    "WorkReport",
    "alpha",
    "alpha_I_deriv_zero",
    "alpha_derivative",
    "alpha_time",
    "angular_average",
    "angular_average_numeric",
    "closest_approach",
    "d_vector",
    "d_vector_numeric",
    "eta_thermal",
    "eta_time",
    "eta_time_residues",
    "fit_kappa",
    "force_closed",
    "force_direct",
    "force_order",
    "force_series",
    "gain_angle",
    "gain_polynomial",
    "green",
    "green_contraction_closed",
    "green_contraction_numeric",
    "green_gradient",
    "half_space_closed",
    "half_space_force",
    "kernel_moment",
    "lambda_closed",
    "lambda_n",
    "lambda_static_imaginary_axis",
    "memory_kernel",
    "pair_force_uniform",
    "read_trajectory",
    "regime_check",
    "scattering_window",
    "static",
    "symmetry_basis",
    "uniform_line",
    "work_order",
    "work_sobolev_form",
    "write_trajectory",
]
