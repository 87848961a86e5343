"""Distributed persistent homology via block-wise boundary matrix reduction."""
from .matrix import BoundaryMatrix, MatrixError, Violation, add_into, column, pivot, validate
from .oracle import INFINITE, PersistenceDiagram, PersistencePair, ReductionResult, betti_numbers, standard_reduce, twist_reduce

__all__ = [
    "BoundaryMatrix",
    "INFINITE",
    "MatrixError",
    "PersistenceDiagram",
    "PersistencePair",
    "ReductionResult",
    "Violation",
    "add_into",
    "betti_numbers",
    "column",
    "pivot",
    "standard_reduce",
    "twist_reduce",
    "validate",
]
