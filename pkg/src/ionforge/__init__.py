"""Design and simulation toolkit for a linear-trap 40Ca+ quantum computer."""

from . import chain, cooling, dynamics, optics, trap
from .kernels import BACKEND

__version__ = "0.1.0"

__all__ = ["BACKEND", "chain", "cooling", "dynamics", "optics", "trap"]
