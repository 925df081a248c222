"""Spectral workbench for the Klein-Gordon-Boussinesq system."""

from . import errors
from ._core import BACKEND
from .model import ModelCoefficients, hamiltonian_structure
from .spectral import PeriodicGrid, build_grid

__version__ = "0.1.0"

__all__ = ["BACKEND", "ModelCoefficients", "PeriodicGrid", "build_grid", "errors", "hamiltonian_structure", "__version__"]
