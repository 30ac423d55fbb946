"""Deterministic dense linear algebra with an explicit tolerance policy.

Rank and null space both come from one reduced row-echelon pass with partial pivoting.
A pivot counts iff its magnitude exceeds ``rank_tol`` times the largest initial absolute
entry of the input, so the same tolerance governs every rank decision in the pipeline.
"""

from dataclasses import dataclass

import numpy as np
import numpy.typing as npt

from submem_core.errors import EmptyInputError
from submem_core.types import DenseMatrix, TolerancePolicy, as_dense

__all__ = (
    "ComplementResult",
    "null_space",
    "orthogonal_complement_from_samples",
    "rank",
    "row_echelon",
)

_DEFAULT_TOL = TolerancePolicy()


@dataclass(frozen=True, slots=True)
class ComplementResult:
    """Orthogonal complement of a sample stack.

    Attributes:
        basis: ``m_hat x n`` matrix whose rows annihilate every sample.
        sample_rank: Numerical rank of the sample stack.
        sufficient: False when an expected dimension was given and ``m_hat`` differs,
            meaning the caller should draw more samples.
    """

    basis: DenseMatrix
    sample_rank: int
    sufficient: bool

    @property
    def dim(self) -> int:
        return int(self.basis.shape[0])


def row_echelon(matrix: npt.ArrayLike, tol: TolerancePolicy = _DEFAULT_TOL) -> tuple[DenseMatrix, list[int]]:
    """Reduce *matrix* to reduced row-echelon form with partial pivoting.

    Returns:
        The reduced matrix (pivot rows first, each pivot equal to 1) and the list of
        pivot columns in increasing order.
    """
    reduced = as_dense(matrix, allow_empty=False).copy()
    rows, cols = reduced.shape
    threshold = tol.rank_tol * float(np.max(np.abs(reduced)))

    pivots: list[int] = []
    r = 0
    for c in range(cols):
        if r == rows:
            break
        p = r + int(np.argmax(np.abs(reduced[r:, c])))
        if abs(reduced[p, c]) <= threshold:
            continue
        if p != r:
            reduced[[r, p]] = reduced[[p, r]]
        reduced[r] /= reduced[r, c]
        factors = reduced[:, c].copy()
        factors[r] = 0.0
        reduced -= np.outer(factors, reduced[r])
        reduced[:, c] = 0.0
        reduced[r, c] = 1.0
        pivots.append(c)
        r += 1
    return reduced, pivots


def rank(matrix: npt.ArrayLike, tol: TolerancePolicy = _DEFAULT_TOL) -> int:
    """Numerical rank under Gaussian elimination with partial pivoting."""
    _, pivots = row_echelon(matrix, tol)
    return len(pivots)


def null_space(matrix: npt.ArrayLike, tol: TolerancePolicy = _DEFAULT_TOL) -> DenseMatrix:
    """Basis of ``{v : M v = 0}`` as the rows of a ``(c - rank) x c`` matrix.

    Rows come from the free-variable parametrization of the reduced form, each rescaled
    so that its max-abs entry is 1.
    """
    reduced, pivots = row_echelon(matrix, tol)
    cols = reduced.shape[1]
    pivot_set = set(pivots)
    free = [c for c in range(cols) if c not in pivot_set]

    basis = np.zeros((len(free), cols))
    for k, f in enumerate(free):
        basis[k, f] = 1.0
        for row, pc in enumerate(pivots):
            basis[k, pc] = -reduced[row, f]
        basis[k] /= np.max(np.abs(basis[k]))
    return basis


def orthogonal_complement_from_samples(
    samples: npt.ArrayLike,
    expected_dim: int | None = None,
    tol: TolerancePolicy = _DEFAULT_TOL,
) -> ComplementResult:
    """Basis of the subspace orthogonal to every sample row.

    A dimension mismatch against *expected_dim* is reported through
    :attr:`ComplementResult.sufficient` rather than raised, so the caller can draw more
    samples and retry.
    """
    stack = as_dense(samples, name="samples")
    if stack.shape[0] == 0 or stack.shape[1] == 0:
        raise EmptyInputError("empty input")

    basis = null_space(stack, tol)
    sufficient = expected_dim is None or basis.shape[0] == expected_dim
    return ComplementResult(basis=basis, sample_rank=stack.shape[1] - basis.shape[0], sufficient=sufficient)
