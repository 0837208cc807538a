"""Lie point symmetries of two-component reaction-diffusion systems."""
from .expr import parse, render, is_zero
from .model import DiffusionMatrix, RDSystem
from .symmetry import Generator, GeneratorTemplate, invariance_residual, prolong2

__all__ = ["parse", "render", "is_zero", "DiffusionMatrix", "RDSystem", "Generator",
           "GeneratorTemplate", "invariance_residual", "prolong2"]
__version__ = "0.1.0"
