"""Numerical laboratory for Grauert tubes, complexified eigenfunctions,
tempered spectral projections, Poisson-wave kernels and complex zero sets
on constant-curvature model manifolds."""

from .errors import GrauertLabError
from .geometry import ComplexPoint, ModelManifold, PhasePoint, exp_imaginary, grauert_rho
from .eigenbasis import Eigenbasis, EigenbasisSpec
from .projector import SpectralWindow, p_tempered, pi_complex
from .fits import fit_loglog

__all__ = [
    "GrauertLabError",
    "ComplexPoint",
    "ModelManifold",
    "PhasePoint",
    "exp_imaginary",
    "grauert_rho",
    "Eigenbasis",
    "EigenbasisSpec",
    "SpectralWindow",
    "p_tempered",
    "pi_complex",
    "fit_loglog",
]

__version__ = "0.1.0"
