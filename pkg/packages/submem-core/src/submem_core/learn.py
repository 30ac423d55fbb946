"""Learning phase: recover the sparse constraint matrix B from its dataset.

The orthogonal complement ``A = D B`` of the samples is handed to modified ER-SpUD:
one L1 row problem per column pair, then a greedy pick of the sparsest rank-increasing
candidates. An exhaustive sparse-support search covers tiny instances, and row matching
scores a recovered matrix against a reference up to permutation and scaling.
"""

from collections.abc import Sequence
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from itertools import combinations
from math import comb
from time import perf_counter
from typing import NamedTuple

import numpy as np
import numpy.typing as npt

from submem_core.errors import InstanceTooLarge, InsufficientSamples, LearningFailed, NoSparseBasis
from submem_core.linalg import null_space, orthogonal_complement_from_samples, rank
from submem_core.lp import L1RowProblem, solve_l1_row
from submem_core.types import DenseMatrix, TolerancePolicy, Vector, as_dense

__all__ = (
    "ERSpUDConfig",
    "ERSpUDResult",
    "LearnReport",
    "RowMatch",
    "canonicalize_row",
    "er_spud",
    "exhaustive_sparse_basis",
    "l0_count",
    "learn_constraints",
    "match_rows",
)

_DEFAULT_TOL = TolerancePolicy()
_MAX_SUPPORTS = 10**6


@dataclass(frozen=True, slots=True)
class ERSpUDConfig:
    """Knobs for :func:`er_spud`.

    Attributes:
        pair_budget: Number of column pairs to solve; ``None`` solves all ``n(n-1)/2``.
            A smaller budget subsamples pairs uniformly with *seed*, which departs from
            the all-pairs algorithm and voids its recovery guarantee.
        sparsity_tol: Override for ``TolerancePolicy.sparsity_tol``.
        rank_tol: Override for ``TolerancePolicy.rank_tol``.
        parallel: Solve pair subproblems on a thread pool of *threads* workers.
        match_tol: Candidates within this max-abs distance after canonicalization are
            duplicates; also the exactness threshold for row matching.
    """

    pair_budget: int | None = None
    sparsity_tol: float | None = None
    rank_tol: float | None = None
    parallel: bool = False
    threads: int = 4
    seed: int = 0
    match_tol: float = 1e-7
    lp_max_iterations: int | None = None

    def policy(self, tol: TolerancePolicy) -> TolerancePolicy:
        return TolerancePolicy(
            rank_tol=self.rank_tol or tol.rank_tol,
            zero_tol=tol.zero_tol,
            ratio_tol=tol.ratio_tol,
            sparsity_tol=self.sparsity_tol or tol.sparsity_tol,
        )


@dataclass(frozen=True, slots=True)
class ERSpUDResult:
    """Selected rows ``V_hat`` (canonical form), the dictionary ``D_hat`` and pool statistics."""

    V_hat: DenseMatrix
    D_hat: DenseMatrix
    lp_count: int
    failed_lps: int
    pool_size: int


class RowMatch(NamedTuple):
    """``scales[k] * B_hat[k]`` approximates ``B_ref[permutation[k]]``."""

    permutation: list[int]
    scales: Vector
    max_residual: float


@dataclass(frozen=True, slots=True)
class LearnReport:
    """Outcome of :func:`learn_constraints`.

    The matching fields stay ``None`` unless a reference matrix was supplied.
    """

    B_hat: DenseMatrix
    D_hat: DenseMatrix
    lp_count: int
    failed_lps: int
    pool_size: int
    wall_time_ms: float
    permutation: list[int] | None = None
    scales: Vector | None = field(default=None, repr=False)
    max_residual: float | None = None
    exact: bool | None = None


def l0_count(v: Vector, sparsity_tol: float) -> int:
    """Entries with ``|v_k| > sparsity_tol * |v|_inf``."""
    peak = float(np.max(np.abs(v))) if v.size else 0.0
    return int(np.count_nonzero(np.abs(v) > sparsity_tol * peak)) if peak > 0 else 0


def canonicalize_row(v: npt.ArrayLike, sparsity_tol: float) -> Vector | None:
    """Zero sub-threshold entries, scale max-abs to 1 and make the first nonzero positive.

    Returns ``None`` for the zero vector.
    """
    row = np.asarray(v, dtype=np.float64)
    peak = float(np.max(np.abs(row))) if row.size else 0.0
    if peak == 0.0:
        return None
    out = np.where(np.abs(row) > sparsity_tol * peak, row, 0.0) / peak
    if out[np.flatnonzero(out)[0]] < 0:
        out = -out
    return out


class _CandidatePool:
    """Canonical candidate rows in insertion order, deduplicated per support pattern."""

    def __init__(self, match_tol: float) -> None:
        self.rows: list[Vector] = []
        self._by_support: dict[bytes, list[Vector]] = {}
        self._match_tol = match_tol

    def add(self, row: Vector) -> None:
        key = np.packbits(row != 0).tobytes()
        bucket = self._by_support.setdefault(key, [])
        if any(float(np.max(np.abs(row - other))) <= self._match_tol for other in bucket):
            return
        bucket.append(row)
        self.rows.append(row)


def _column_pairs(n: int, budget: int | None, seed: int) -> npt.NDArray[np.intp]:
    first, second = np.triu_indices(n, k=1)
    pairs = np.column_stack([first, second])
    total = pairs.shape[0]
    if budget is None or budget == total:
        return pairs
    if not 0 <= budget <= total:
        raise ValueError(f"pair_budget must lie in [0, {total}], got {budget}")
    chosen = np.sort(np.random.default_rng(seed).choice(total, size=budget, replace=False))
    return pairs[chosen]


def _select_sparsest(pool: Sequence[Vector], m: int, tol: TolerancePolicy) -> list[Vector]:
    counts = [l0_count(row, tol.sparsity_tol) for row in pool]
    order = sorted(range(len(pool)), key=lambda k: (counts[k], k))
    selected: list[Vector] = []
    for k in order:
        if len(selected) == m:
            break
        if rank(np.vstack([*selected, pool[k]]), tol) == len(selected) + 1:
            selected.append(pool[k])
    return selected


def er_spud(
    U: npt.ArrayLike,  # noqa: N803
    cfg: ERSpUDConfig | None = None,
    tol: TolerancePolicy = _DEFAULT_TOL,
) -> ERSpUDResult:
    """Modified ER-SpUD on an ``m x n`` matrix of full row rank.

    For every pair ``i < j`` the constraint vector ``u_i + u_j`` defines an L1 row
    problem whose solution ``w^T U`` joins the candidate pool. Rows are then taken in
    increasing ``l0`` order (lowest pool index on ties) whenever they raise the rank,
    until ``m`` are selected.

    Raises:
        LearningFailed: Fewer than ``m`` rank-increasing candidates were found.
    """
    cfg = cfg or ERSpUDConfig()
    policy = cfg.policy(tol)
    observations = as_dense(U, name="U", allow_empty=False)
    m, n = observations.shape
    if rank(observations, policy) != m:
        raise ValueError(f"U must have full row rank {m}")

    pairs = _column_pairs(n, cfg.pair_budget, cfg.seed)

    def solve(pair: npt.NDArray[np.intp]) -> Vector | None:
        problem = L1RowProblem(observations, observations[:, pair[0]] + observations[:, pair[1]])
        solution = solve_l1_row(problem, cfg.lp_max_iterations)
        return solution.w @ observations if solution.ok else None

    if cfg.parallel and cfg.threads > 1:
        with ThreadPoolExecutor(max_workers=cfg.threads) as executor:
            candidates = list(executor.map(solve, pairs, chunksize=64))
    else:
        candidates = [solve(pair) for pair in pairs]

    pool = _CandidatePool(cfg.match_tol)
    for candidate in candidates:
        if candidate is not None and (row := canonicalize_row(candidate, policy.sparsity_tol)) is not None:
            pool.add(row)

    selected = _select_sparsest(pool.rows, m, policy)
    if len(selected) < m:
        raise LearningFailed(f"learning failed: {len(selected)} of {m} rank-increasing candidates found")

    V_hat = np.vstack(selected)  # noqa: N806
    D_hat = np.linalg.solve(V_hat @ V_hat.T, V_hat @ observations.T).T  # noqa: N806
    failed = sum(candidate is None for candidate in candidates)
    return ERSpUDResult(V_hat=V_hat, D_hat=D_hat, lp_count=len(pairs), failed_lps=failed, pool_size=len(pool.rows))


def match_rows(B_hat: npt.ArrayLike, B_ref: npt.ArrayLike) -> RowMatch:  # noqa: N803
    """Match recovered rows to reference rows up to permutation and scaling.

    Pairs are matched greedily by normalized absolute cosine similarity; each matched
    pair gets the least-squares scale ``<b_hat, b> / <b_hat, b_hat>``.
    """
    recovered = as_dense(B_hat, name="B_hat")
    reference = as_dense(B_ref, name="B_ref")
    if recovered.shape != reference.shape:
        raise ValueError(f"dimension mismatch: {recovered.shape} vs {reference.shape}")

    m = recovered.shape[0]
    norms = np.outer(np.linalg.norm(recovered, axis=1), np.linalg.norm(reference, axis=1))
    overlap = np.abs(recovered @ reference.T)
    similarity = np.divide(overlap, norms, out=np.zeros_like(overlap), where=norms > 0)

    permutation = [-1] * m
    taken = np.zeros(m, dtype=bool)
    for flat in np.argsort(-similarity, axis=None, kind="stable"):
        k, ref = divmod(int(flat), m)
        if permutation[k] < 0 and not taken[ref]:
            permutation[k] = ref
            taken[ref] = True

    scales = np.zeros(m)
    max_residual = 0.0
    for k, ref in enumerate(permutation):
        energy = float(recovered[k] @ recovered[k])
        scales[k] = float(recovered[k] @ reference[ref]) / energy if energy > 0 else 0.0
        max_residual = max(max_residual, float(np.max(np.abs(scales[k] * recovered[k] - reference[ref]), initial=0.0)))
    return RowMatch(permutation=permutation, scales=scales, max_residual=max_residual)


def learn_constraints(
    samples: npt.ArrayLike,
    m: int,
    cfg: ERSpUDConfig | None = None,
    tol: TolerancePolicy = _DEFAULT_TOL,
    reference: npt.ArrayLike | None = None,
) -> LearnReport:
    """Recover B (up to row permutation and scale) from dataset samples.

    Args:
        samples: ``N x n`` stack of message vectors from ``M = null(B)``.
        m: Number of constraints to recover.
        cfg: ER-SpUD configuration.
        tol: Tolerance policy.
        reference: Optional true B; when given, the report carries the row matching and
            ``exact`` is set against ``cfg.match_tol``.

    Raises:
        InsufficientSamples: The sample complement does not have dimension *m*.
        LearningFailed: ER-SpUD found fewer than *m* independent sparse rows.
    """
    if m < 1:
        raise ValueError(f"m must be >= 1, got {m}")
    cfg = cfg or ERSpUDConfig()
    started = perf_counter()

    complement = orthogonal_complement_from_samples(samples, m, tol)
    if not complement.sufficient:
        raise InsufficientSamples(f"insufficient samples: complement has dimension {complement.dim}, expected {m}")

    result = er_spud(complement.basis, cfg, tol)
    report = LearnReport(
        B_hat=result.V_hat,
        D_hat=result.D_hat,
        lp_count=result.lp_count,
        failed_lps=result.failed_lps,
        pool_size=result.pool_size,
        wall_time_ms=(perf_counter() - started) * 1000.0,
    )
    if reference is None:
        return report

    match = match_rows(result.V_hat, reference)
    return LearnReport(
        B_hat=report.B_hat,
        D_hat=report.D_hat,
        lp_count=report.lp_count,
        failed_lps=report.failed_lps,
        pool_size=report.pool_size,
        wall_time_ms=report.wall_time_ms,
        permutation=match.permutation,
        scales=match.scales,
        max_residual=match.max_residual,
        exact=match.max_residual <= cfg.match_tol,
    )


def _minimal_support_vector(basis: DenseMatrix, support: tuple[int, ...], tol: TolerancePolicy) -> Vector | None:
    m, n = basis.shape
    rest = np.setdiff1d(np.arange(n), support, assume_unique=True)
    left = null_space(basis[:, rest].T, tol) if rest.size else np.eye(m)
    if left.shape[0] != 1:
        return None
    row = canonicalize_row(left[0] @ basis, tol.sparsity_tol)
    if row is None or l0_count(row, tol.sparsity_tol) != len(support):
        return None
    return row


def exhaustive_sparse_basis(A: npt.ArrayLike, d: int, tol: TolerancePolicy = _DEFAULT_TOL) -> DenseMatrix:  # noqa: N803
    """Sparse basis of ``rowspace(A)`` by scanning every support of size at most *d*.

    The row-space vectors supported within ``T`` are ``z^T A`` for ``z`` in the left null
    space of ``A[:, [n] \\ T]``. A support contributes its vector only when that space is
    one-dimensional and the vector uses all of ``T``: such minimal supports carry a unique
    vector up to scale, and every row-space vector is a combination of minimal-support
    vectors within its own support. Candidates are then taken sparsest-first while they
    raise the rank.

    Raises:
        InstanceTooLarge: More than a million supports would be scanned.
        NoSparseBasis: Fewer than ``m`` independent d-sparse vectors exist.
    """
    basis = as_dense(A, name="A", allow_empty=False)
    m, n = basis.shape
    if not 1 <= d <= n:
        raise ValueError(f"d must lie in [1, {n}], got {d}")
    if (supports := sum(comb(n, size) for size in range(1, d + 1))) > _MAX_SUPPORTS:
        raise InstanceTooLarge(f"instance too large: {supports} supports of size <= {d}")

    found: list[Vector] = []
    for size in range(1, d + 1):
        for support in combinations(range(n), size):
            if (row := _minimal_support_vector(basis, support, tol)) is not None:
                found.append(row)

    selected = _select_sparsest(found, m, tol)
    if len(selected) < m:
        raise NoSparseBasis(f"no sparse basis: {len(selected)} of {m} independent {d}-sparse rows")
    return np.vstack(selected)
