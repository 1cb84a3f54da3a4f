"""Executable model of the AllConcur atomic broadcast protocol with a state-space checker."""

from .kernels import BACKEND
from .overlay import Digraph, complete_digraph, make_circulant, vertex_connectivity
from .state import Config

__version__ = "0.1.0"

__all__ = ["BACKEND", "Config", "Digraph", "complete_digraph", "make_circulant", "vertex_connectivity"]
