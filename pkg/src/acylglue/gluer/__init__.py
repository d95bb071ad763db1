"""Desk-scale model of the pregluing and Banach-contraction construction."""

from .contraction import (
    ContractionResult,
    ContractionSpec,
    LinearOperatorHandle,
    contract_solve,
    verify_contraction_certificate,
)
from .cutoff import cutoff, preglue, smooth_step
from .experiments import (
    GlueStep,
    GluingReport,
    PRESET_NAMES,
    error_norm_experiment,
    error_term,
    glue_model,
    linear_estimate_experiment,
    problem_preset,
    quadratic_probe,
    run_glue_experiment,
)
from .fitting import FitResult, fit_log_linear
from .model import (
    CapCondition,
    GluedLinearization,
    ModelGluingProblem,
    NeckGrid,
    approximate_kernel_elements,
    assemble_linearization,
    end_kernel_sections,
    glued_kernel_sections,
    kernel_constraints,
    matching_kernel,
    mode_bvp_eigenvalues,
    model_matching_kernel,
    selfadjointness_defect,
    sup_norm,
)

__all__ = [
    "CapCondition",
    "ContractionResult",
    "ContractionSpec",
    "FitResult",
    "GluedLinearization",
    "GlueStep",
    "GluingReport",
    "LinearOperatorHandle",
    "ModelGluingProblem",
    "NeckGrid",
    "PRESET_NAMES",
    "approximate_kernel_elements",
    "assemble_linearization",
    "contract_solve",
    "cutoff",
    "end_kernel_sections",
    "error_norm_experiment",
    "error_term",
    "fit_log_linear",
    "glue_model",
    "glued_kernel_sections",
    "kernel_constraints",
    "linear_estimate_experiment",
    "matching_kernel",
    "mode_bvp_eigenvalues",
    "model_matching_kernel",
    "preglue",
    "problem_preset",
    "quadratic_probe",
    "run_glue_experiment",
    "selfadjointness_defect",
    "smooth_step",
    "sup_norm",
    "verify_contraction_certificate",
]
