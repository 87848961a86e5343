"""Filtration construction and file formats."""
from .cubical import CubicalFiltration, Image3D, build_cubical, cell_count, cubical_filtration
from .formats import (
    FormatError,
    PairsFile,
    read_image,
    read_matrix,
    read_pairs,
    write_image,
    write_matrix,
    write_pairs,
)
from .grf import count_local_minima, generate_image

__all__ = [
    "CubicalFiltration",
    "FormatError",
    "Image3D",
    "PairsFile",
    "build_cubical",
    "cell_count",
    "count_local_minima",
    "cubical_filtration",
    "generate_image",
    "read_image",
    "read_matrix",
    "read_pairs",
    "write_image",
    "write_matrix",
    "write_pairs",
]
