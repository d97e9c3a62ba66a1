"""Orthogonal nets and their Ribaucour transformations from data on nodal rational curves."""

__version__ = "0.1.0"

from .curve import (  # noqa: E402
    INFINITY,
    Component,
    Node,
    PointOnCurve,
    SpectralCurveData,
    arithmetic_genus,
    sigma_image,
    validate_data,
)
from .omega import OmegaData, build_omega, residues  # noqa: E402
from .baker_akhiezer import BASolution, assemble_system, eval_psi, leading_coeffs, partial_psi, solve_psi  # noqa: E402
from .net import Grid, OrthogonalNet, conjugacy_report, orthogonality_report, synth_net  # noqa: E402
from .ribaucour import (  # noqa: E402
    bianchi_cube,
    closed_form_l1,
    concircularity_check,
    lemma_identities,
    ribaucour_pair,
    swap_data,
)
from .datasets import build_dumbbell, load_dataset  # noqa: E402

__all__ = [
    "INFINITY",
    "BASolution",
    "Component",
    "Grid",
    "Node",
    "OmegaData",
    "OrthogonalNet",
    "PointOnCurve",
    "SpectralCurveData",
    "arithmetic_genus",
    "assemble_system",
    "bianchi_cube",
    "build_dumbbell",
    "build_omega",
    "closed_form_l1",
    "concircularity_check",
    "conjugacy_report",
    "eval_psi",
    "leading_coeffs",
    "lemma_identities",
    "load_dataset",
    "orthogonality_report",
    "partial_psi",
    "residues",
    "ribaucour_pair",
    "sigma_image",
    "solve_psi",
    "swap_data",
    "synth_net",
    "validate_data",
]
