""" StatePoll utility functions

Copyright (c) 2021 IdmFoundInHim, under MIT License
"""
__all__ = [
    "as_vector",
    "as_matrix",
    "face_of",
    "full_face",
    "iter_faces",
    "readonly",
    "str_number",
    "str_vector",
]

from collections.abc import Iterable, Iterator, Sequence

import numpy as np
from more_itertools import powerset

from ._constants import TABLE_DIGITS
from .types import Face


def readonly(array: np.ndarray) -> np.ndarray:
    """Return `array` with its write flag cleared"""
    array.setflags(write=False)
    return array


def as_vector(values: Iterable[float] | np.ndarray, n: int | None = None):
    """Copy `values` into a read-only float vector, checking its length"""
    vector = np.array(values, dtype=float).reshape(-1)
    if n is not None and vector.shape != (n,):
        raise ValueError(f"expected {n} entries, got {vector.size}")
    return readonly(vector)


def as_matrix(values: Iterable[Iterable[float]] | np.ndarray, n: int):
    """Copy `values` into a read-only n-by-n float matrix"""
    matrix = np.array(values, dtype=float)
    if matrix.shape != (n, n):
        raise ValueError(f"expected a {n}x{n} matrix, got {matrix.shape}")
    return readonly(matrix)


def face_of(stations: Iterable[int]) -> Face:
    """Build a face from 1-based station numbers"""
    return Face(frozenset(s - 1 for s in stations))


def full_face(n: int) -> Face:
    return Face(frozenset(range(n)))


def iter_faces(n: int, include_empty: bool = False) -> Iterator[Face]:
    """Every face of {1..n}, smallest first"""
    for subset in powerset(range(n)):
        if subset or include_empty:
            yield Face(frozenset(subset))


def str_number(value: float | complex, digits: int = TABLE_DIGITS) -> str:
    """Render a number with `digits` significant digits"""
    if isinstance(value, complex):
        return f"{value.real:.{digits}g}{value.imag:+.{digits}g}j"
    return f"{value:.{digits}g}"


def str_vector(values: Sequence[float] | np.ndarray) -> str:
    return "(" + ", ".join(str_number(float(v)) for v in values) + ")"
