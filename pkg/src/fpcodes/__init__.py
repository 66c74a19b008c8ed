"""Folded polynomial codes for straggler-tolerant computation of A A^T."""
from . import codes, field, folded, kernels, linalg, sim
from .codes import (
    CodeInstance,
    CodeParams,
    decode,
    encode,
    make_instance,
    recovery_threshold,
    select_points,
)
from .errors import *  # noqa: F401,F403
from .field import FieldElement, FieldSpec
from .linalg import DenseMatrix, read_matrix, write_matrix

__version__ = "0.1.0"

__all__ = [
    "codes", "field", "folded", "kernels", "linalg", "sim",
    "CodeInstance", "CodeParams", "DenseMatrix", "FieldElement", "FieldSpec",
    "decode", "encode", "make_instance", "read_matrix", "recovery_threshold",
    "select_points", "write_matrix",
]
