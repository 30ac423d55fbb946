"""Seeded generators for the sparse-sub-Gaussian constraint model.

Every generator takes an integer seed and builds its own ``numpy.random.Generator``
(PCG64), so objects are bit-identical per (parameters, seed) and no global RNG state is
touched. Draws are prefix-stable: asking for more samples or columns with the same seed
extends, rather than reshuffles, a smaller draw.
"""

from dataclasses import dataclass, field
from functools import cached_property
from hashlib import blake2s
from typing import Literal, Self

import numpy as np
import numpy.typing as npt
from scipy import sparse

from submem_core.errors import DegenerateParameters, InstanceTooLarge, TrivialDataset
from submem_core.linalg import null_space, rank
from submem_core.types import DenseMatrix, TolerancePolicy, Vector, as_dense

__all__ = (
    "SparseConstraintMatrix",
    "WeightLaw",
    "enumerate_binary_nullspace",
    "generate_B",
    "generate_error",
    "sample_dataset",
    "sample_until_stable",
)

_DEFAULT_TOL = TolerancePolicy()

# Sanity cap on draws per column relative to the row count.
_MAX_DRAWS_PER_ROW = 64
# Brute-force guard for the binary null-space scan.
_MAX_ENUMERATION_N = 24
_ENUMERATION_CHUNK = 1 << 16

type WeightKind = Literal["uniform-integer-set", "gaussian", "rademacher"]


@dataclass(frozen=True, slots=True)
class WeightLaw:
    """Zero-mean sub-Gaussian law for constraint weights or dataset coefficients.

    ``uniform-integer-set`` draws from ``{-L..-1, 1..L}``, ``rademacher`` from ``{+1, -1}``
    and ``gaussian`` from ``N(0, sigma^2)``.
    """

    kind: WeightKind
    level: int = 3
    sigma: float = 1.0

    def __post_init__(self) -> None:
        if self.kind == "uniform-integer-set" and self.level < 1:
            raise ValueError(f"uniform-integer-set needs L >= 1, got {self.level}")
        if self.kind == "gaussian" and not self.sigma > 0:
            raise ValueError(f"gaussian needs sigma > 0, got {self.sigma}")

    @classmethod
    def uniform_integers(cls, level: int) -> Self:
        return cls("uniform-integer-set", level=level)

    @classmethod
    def gaussian(cls, sigma: float = 1.0) -> Self:
        return cls("gaussian", sigma=sigma)

    @classmethod
    def rademacher(cls) -> Self:
        return cls("rademacher")

    @classmethod
    def parse(cls, text: str) -> Self:
        """Parse ``int:L``, ``gauss:sigma`` or ``rademacher``."""
        kind, _, arg = text.strip().partition(":")
        match kind.lower():
            case "int" | "uniform-integer-set":
                return cls.uniform_integers(int(arg or 3))
            case "gauss" | "gaussian":
                return cls.gaussian(float(arg or 1.0))
            case "rademacher" | "pm1":
                return cls.rademacher()
        raise ValueError(f"Unknown weight law: {text!r}")

    def __str__(self) -> str:
        match self.kind:
            case "uniform-integer-set":
                return f"int:{self.level}"
            case "gaussian":
                return f"gauss:{self.sigma:g}"
        return "rademacher"

    @property
    def is_integral(self) -> bool:
        return self.kind != "gaussian"

    def draw(self, rng: np.random.Generator, size: int | tuple[int, ...]) -> npt.NDArray[np.float64]:
        match self.kind:
            case "uniform-integer-set":
                # One draw per entry keeps longer draws extending shorter ones.
                raw = rng.integers(-self.level, self.level, size=size)
                return np.where(raw >= 0, raw + 1, raw).astype(np.float64)
            case "gaussian":
                return rng.normal(0.0, self.sigma, size=size)
        return rng.choice((-1.0, 1.0), size=size)


@dataclass(frozen=True, eq=False)
class SparseConstraintMatrix:
    """The ``m x n`` constraint matrix B, stored column-wise.

    Column ``j`` holds its neighbor set ``N_j`` (distinct rows) and one weight per member,
    which makes the same object the weighted adjacency of the bipartite graph between
    message coordinates and constraints. ``d`` is the generation parameter (draws per
    column); ``degrees`` gives the realized ``|N_j|``.
    """

    m: int
    n: int
    d: int
    matrix: sparse.csc_array = field(repr=False)

    def __post_init__(self) -> None:
        if self.matrix.shape != (self.m, self.n):
            raise ValueError(f"matrix shape {self.matrix.shape} does not match ({self.m}, {self.n})")
        self.matrix.sum_duplicates()
        self.matrix.sort_indices()
        data = self.matrix.data
        if not np.all(np.isfinite(data)) or np.any(data == 0):
            raise ValueError("every stored weight must be nonzero and finite")
        degrees = np.diff(self.matrix.indptr)
        if self.n and (degrees.min() < 1 or degrees.max() > self.d):
            raise ValueError(f"column degrees must lie in [1, {self.d}], got [{degrees.min()}, {degrees.max()}]")

    @classmethod
    def from_entries(
        cls,
        m: int,
        n: int,
        d: int,
        rows: npt.ArrayLike,
        cols: npt.ArrayLike,
        weights: npt.ArrayLike,
    ) -> Self:
        matrix = sparse.csc_array(
            (np.asarray(weights, dtype=np.float64), (np.asarray(rows, dtype=np.intp), np.asarray(cols, dtype=np.intp))),
            shape=(m, n),
        )
        return cls(m=m, n=n, d=d, matrix=matrix)

    @classmethod
    def from_dense(cls, dense: npt.ArrayLike, d: int | None = None, *, zero_tol: float = 0.0) -> Self:
        """Build from a dense matrix, dropping entries with ``|B_ij| <= zero_tol * max|B|``.

        When *d* is omitted the largest realized column degree is used.
        """
        arr = as_dense(dense, allow_empty=False)
        cutoff = zero_tol * float(np.max(np.abs(arr)))
        rows, cols = np.nonzero(np.abs(arr) > cutoff)
        m, n = arr.shape
        if d is None:
            d = max(1, int(np.bincount(cols, minlength=n).max()))
        return cls.from_entries(m, n, d, rows, cols, arr[rows, cols])

    @property
    def indptr(self) -> npt.NDArray[np.int32]:
        return self.matrix.indptr

    @property
    def degrees(self) -> npt.NDArray[np.intp]:
        return np.diff(self.matrix.indptr)

    @property
    def nnz(self) -> int:
        return int(self.matrix.nnz)

    @cached_property
    def is_integral(self) -> bool:
        data = self.matrix.data
        return bool(np.all(data == np.round(data)))

    def column(self, j: int) -> tuple[npt.NDArray[np.int32], npt.NDArray[np.float64]]:
        """Neighbor rows and weights of column *j*."""
        lo, hi = self.matrix.indptr[j], self.matrix.indptr[j + 1]
        return self.matrix.indices[lo:hi], self.matrix.data[lo:hi]

    def entries(self) -> list[tuple[int, int, float]]:
        """Stored ``(row, col, weight)`` triples in column-major order."""
        return [
            (int(row), j, float(weight))
            for j in range(self.n)
            for row, weight in zip(*self.column(j), strict=True)
        ]

    def to_dense(self) -> DenseMatrix:
        return self.matrix.toarray()

    def matvec(self, y: npt.ArrayLike) -> Vector:
        return self.matrix @ np.asarray(y, dtype=np.float64)

    def checksum(self) -> str:
        """Stable blake2s digest of the dimensions and stored entries."""
        h = blake2s()
        h.update(np.asarray([self.m, self.n, self.d], dtype=np.int64).tobytes())
        h.update(self.matrix.indptr.astype(np.int64).tobytes())
        h.update(self.matrix.indices.astype(np.int64).tobytes())
        h.update(self.matrix.data.astype(np.float64).tobytes())
        return h.hexdigest()


def generate_B(m: int, n: int, d: int, law: WeightLaw, seed: int) -> SparseConstraintMatrix:  # noqa: N802
    """Draw B from the sparse-sub-Gaussian model.

    Each column independently draws *d* rows uniformly with replacement; duplicate draws
    collapse to one edge carrying the weight of the first draw.
    """
    if m < 1 or n < 1 or d < 1:
        raise DegenerateParameters(f"degenerate parameters: m={m}, n={n}, d={d}")
    if d > _MAX_DRAWS_PER_ROW * m:
        raise DegenerateParameters(f"degenerate parameters: d={d} exceeds {_MAX_DRAWS_PER_ROW}*m")

    rng = np.random.default_rng(seed)
    draws = np.empty((n, d), dtype=np.int64)
    weights = np.empty((n, d))
    for j in range(n):
        draws[j] = rng.integers(0, m, size=d)
        weights[j] = law.draw(rng, d)

    order = np.argsort(draws, axis=1, kind="stable")
    sorted_rows = np.take_along_axis(draws, order, axis=1)
    sorted_weights = np.take_along_axis(weights, order, axis=1)
    keep = np.ones_like(sorted_rows, dtype=bool)
    keep[:, 1:] = sorted_rows[:, 1:] != sorted_rows[:, :-1]
    cols = np.broadcast_to(np.arange(n)[:, None], (n, d))[keep]

    return SparseConstraintMatrix.from_entries(m, n, d, sorted_rows[keep], cols, sorted_weights[keep])


def sample_dataset(
    B: SparseConstraintMatrix,  # noqa: N803
    count: int,
    coeff_law: WeightLaw | None = None,
    seed: int = 0,
    tol: TolerancePolicy = _DEFAULT_TOL,
) -> DenseMatrix:
    """Draw *count* message vectors from ``M = null(B)``.

    Each row is a random combination (coefficients i.i.d. from *coeff_law*, standard
    Gaussian by default) of a null-space basis of B.
    """
    if count < 0:
        raise ValueError(f"sample count must be >= 0, got {count}")
    basis = null_space(B.to_dense(), tol)
    if basis.shape[0] == 0:
        raise TrivialDataset("dataset is {0}")
    if count == 0:
        return np.zeros((0, B.n))

    law = coeff_law or WeightLaw.gaussian(1.0)
    rng = np.random.default_rng(seed)
    coeffs = law.draw(rng, (count, basis.shape[0]))
    return coeffs @ basis


def sample_until_stable(
    B: SparseConstraintMatrix,  # noqa: N803
    coeff_law: WeightLaw | None = None,
    seed: int = 0,
    tol: TolerancePolicy = _DEFAULT_TOL,
    cap: int | None = None,
) -> DenseMatrix:
    """Draw dataset samples until their rank stops growing.

    Starts from ``(n - m) + 10`` samples and doubles the count until the sample rank is
    unchanged between consecutive draws or the count reaches *cap* (``4n`` by default).
    """
    limit = cap if cap is not None else 4 * B.n
    count = min(max(1, B.n - B.m + 10), limit)
    previous: int | None = None
    while True:
        samples = sample_dataset(B, count, coeff_law, seed, tol)
        current = rank(samples, tol)
        if current == previous or count >= limit:
            return samples
        previous = current
        count = min(2 * count, limit)


def generate_error(n: int, weight: int, magnitude: int, seed: int) -> Vector:
    """Error vector with exactly *weight* nonzeros, each uniform over ``{+-1..+-magnitude}``.

    The support is the first *weight* entries of a seeded uniform permutation of ``[n]``.
    """
    if not 0 <= weight <= n:
        raise ValueError(f"error weight must lie in [0, {n}], got {weight}")
    if magnitude < 1:
        raise ValueError(f"error magnitude must be >= 1, got {magnitude}")

    rng = np.random.default_rng(seed)
    support = rng.permutation(n)[:weight]
    values = WeightLaw.uniform_integers(magnitude).draw(rng, weight)
    error = np.zeros(n)
    error[support] = values
    return error


def enumerate_binary_nullspace(
    B: SparseConstraintMatrix,  # noqa: N803
    tol: TolerancePolicy = _DEFAULT_TOL,
) -> npt.NDArray[np.int64]:
    """Every ``x`` in ``{+1, -1}^n`` with ``Bx = 0``, one per row.

    Integer weights are checked in exact int64 arithmetic; real weights use
    ``zero_tol`` scaled by ``n * max|B|``. Rows are ordered by the binary index whose
    bit ``j`` set means ``x_j = -1``.
    """
    n = B.n
    if n > _MAX_ENUMERATION_N:
        raise InstanceTooLarge(f"instance too large for enumeration: n={n} > {_MAX_ENUMERATION_N}")

    dense = B.to_dense()
    if B.is_integral:
        weights: npt.NDArray = dense.astype(np.int64)
        threshold = 0.0
    else:
        weights = dense
        threshold = tol.zero_tol * n * float(np.max(np.abs(dense)))

    bits = np.arange(n, dtype=np.int64)
    total = 1 << n
    found: list[npt.NDArray[np.int64]] = []
    for start in range(0, total, _ENUMERATION_CHUNK):
        index = np.arange(start, min(start + _ENUMERATION_CHUNK, total), dtype=np.int64)
        candidates = 1 - 2 * ((index[:, None] >> bits) & 1)
        syndromes = candidates @ weights.T
        hits = np.all(np.abs(syndromes) <= threshold, axis=1)
        found.append(candidates[hits])
    return np.concatenate(found).astype(np.int64)
