"""Data types shared across the learn and recall pipeline."""

from dataclasses import dataclass

import numpy as np
import numpy.typing as npt

from submem_core.errors import EmptyInputError

__all__ = ("DenseMatrix", "TolerancePolicy", "Vector", "as_dense", "as_vector")

type DenseMatrix = npt.NDArray[np.float64]
type Vector = npt.NDArray[np.float64]


@dataclass(frozen=True, slots=True)
class TolerancePolicy:
    """Numerical tolerances used wherever exact real arithmetic is assumed.

    Attributes:
        rank_tol: A pivot counts toward the rank iff it exceeds ``rank_tol`` times the
            largest initial absolute entry of the matrix.
        zero_tol: Absolute threshold below which residuals and syndromes count as zero.
        ratio_tol: Relative width of a gap-ratio cluster in the expander decoder.
        sparsity_tol: Entries below ``sparsity_tol * max|v|`` do not count toward ``|v|_0``.
    """

    rank_tol: float = 1e-9
    zero_tol: float = 1e-9
    ratio_tol: float = 1e-9
    sparsity_tol: float = 1e-8

    def __post_init__(self) -> None:
        for name in ("rank_tol", "zero_tol", "ratio_tol", "sparsity_tol"):
            value = getattr(self, name)
            if not 0.0 < value < 1.0:
                raise ValueError(f"{name} must lie in (0, 1), got {value!r}")


def as_dense(matrix: npt.ArrayLike, *, name: str = "matrix", allow_empty: bool = True) -> DenseMatrix:
    """Coerce *matrix* to a 2-D float64 array with finite entries."""
    arr = np.asarray(matrix, dtype=np.float64)
    if arr.ndim == 1 and arr.size == 0:
        arr = arr.reshape(0, 0)
    if arr.ndim != 2:
        raise ValueError(f"{name} must be 2-D, got shape {arr.shape}")
    if not allow_empty and arr.size == 0:
        raise EmptyInputError("empty input")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} has non-finite entries")
    return arr


def as_vector(vector: npt.ArrayLike, *, length: int | None = None, name: str = "vector") -> Vector:
    """Coerce *vector* to a 1-D float64 array, optionally checking its length."""
    arr = np.asarray(vector, dtype=np.float64)
    if arr.ndim != 1:
        raise ValueError(f"{name} must be 1-D, got shape {arr.shape}")
    if length is not None and arr.shape[0] != length:
        raise ValueError(f"{name} has length {arr.shape[0]}, expected {length}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} has non-finite entries")
    return arr
