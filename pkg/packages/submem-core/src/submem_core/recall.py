"""Recall phase: syndromes, the iterative expander decoder, and expansion diagnostics.

The decoder keeps a gap vector ``g = z - B e_hat``. On each step it looks for a column
whose gap ratios ``g_i / B_ij`` over its neighbors agree in at least ``theta_vote`` places,
moves ``e_hat_j`` by the agreed value and updates only that column's gaps. Every step
reads and writes the neighborhood of one coordinate, so each update is local to the graph.
"""

from collections.abc import Iterator
from dataclasses import dataclass, field
from itertools import combinations
from math import ceil, comb, exp, log
from typing import Literal, NamedTuple

import numpy as np
import numpy.typing as npt
from scipy.special import gammaln

from submem_core.errors import InstanceTooLarge
from submem_core.model import SparseConstraintMatrix
from submem_core.types import Vector, as_vector

__all__ = (
    "DecodeResult",
    "DecoderConfig",
    "DecoderState",
    "DecodeStatus",
    "ExpansionReport",
    "RecallResult",
    "check_expansion",
    "decode",
    "expansion_capacity",
    "expansion_failure_bound",
    "iter_decode",
    "log_expansion_term",
    "recall",
    "syndrome",
)

type DecodeStatus = Literal["success", "stalled", "iteration-limit"]

_MAX_SUBSETS = 10**7
_MIN_CORRECTION_RADIUS = 16


def expansion_capacity(m: int, n: int, d: int) -> int:
    """Guaranteed correction radius ``ceil(m^2 / (2 d^2 n))``."""
    if m < 1 or n < 1 or d < 1:
        raise ValueError(f"m, n, d must be positive, got {m}, {n}, {d}")
    return -(-m * m // (2 * d * d * n))


def syndrome(B: SparseConstraintMatrix, y: npt.ArrayLike) -> Vector:  # noqa: N803
    """``z = B y``, in exact int64 arithmetic when both operands are integral."""
    vec = as_vector(y, length=B.n, name="y")
    if B.is_integral and np.all(vec == np.round(vec)):
        return (B.matrix.astype(np.int64) @ vec.astype(np.int64)).astype(np.float64)
    return B.matvec(vec)


@dataclass(frozen=True, slots=True)
class DecoderConfig:
    """Decoder knobs.

    A column votes with its gap ratios; it qualifies when at least
    ``ceil((1 - 2 epsilon) d)`` of them agree, with ``d`` the nominal draws per column.
    Columns whose collapsed degree falls below that count never qualify.
    """

    epsilon: float = 0.25
    max_iterations: int | None = None
    ratio_tol: float = 1e-9
    zero_tol: float = 1e-9

    def __post_init__(self) -> None:
        if not 0.0 < self.epsilon <= 0.25:
            raise ValueError(f"epsilon must lie in (0, 1/4], got {self.epsilon}")
        if self.max_iterations is not None and self.max_iterations < 0:
            raise ValueError(f"max_iterations must be >= 0, got {self.max_iterations}")

    def theta_vote(self, d: int) -> int:
        return max(1, ceil((1.0 - 2.0 * self.epsilon) * d - 1e-12))

    def iteration_budget(self, B: SparseConstraintMatrix) -> int:  # noqa: N803
        if self.max_iterations is not None:
            return self.max_iterations
        return 2 * max(_MIN_CORRECTION_RADIUS, expansion_capacity(B.m, B.n, B.d))


@dataclass(slots=True)
class DecoderState:
    """Running estimate; ``gaps`` always equals ``z - B e_hat``."""

    e_hat: Vector
    gaps: Vector
    iterations: int = 0


class DecodeResult(NamedTuple):
    e_hat: Vector
    status: DecodeStatus
    iterations: int
    residual: float


class RecallResult(NamedTuple):
    x_hat: Vector
    status: DecodeStatus
    e_hat: Vector
    iterations: int
    residual: float


@dataclass(frozen=True, slots=True)
class _Neighborhoods:
    """Column neighbor lists padded to a rectangle; padding is masked out."""

    rows: npt.NDArray[np.intp]
    weights: npt.NDArray[np.float64]
    valid: npt.NDArray[np.bool_]

    @classmethod
    def of(cls, B: SparseConstraintMatrix) -> "_Neighborhoods":  # noqa: N803
        degrees = B.degrees
        width = int(degrees.max(initial=1))
        valid = np.arange(width)[None, :] < degrees[:, None]
        rows = np.zeros((B.n, width), dtype=np.intp)
        weights = np.ones((B.n, width))
        rows[valid] = B.matrix.indices
        weights[valid] = B.matrix.data
        return cls(rows=rows, weights=weights, valid=valid)


def _pick_column(
    gaps: Vector,
    hoods: _Neighborhoods,
    theta: int,
    ratio_tol: float,
    zero_threshold: float,
) -> tuple[int, float] | None:
    """Qualifying column with the most votes (smallest index on ties) and its update."""
    ratios = np.where(hoods.valid, gaps[hoods.rows] / hoods.weights, np.nan)
    anchors = ratios[:, :, None]
    agree = np.abs(ratios[:, None, :] - anchors) <= ratio_tol * np.maximum(1.0, np.abs(anchors))
    votes = agree.sum(axis=2)
    votes[~(np.abs(ratios) > zero_threshold)] = 0

    best_anchor = np.argmax(votes, axis=1)
    column_votes = votes[np.arange(votes.shape[0]), best_anchor]
    j = int(np.argmax(column_votes))
    if column_votes[j] < theta:
        return None
    members = ratios[j, agree[j, best_anchor[j]]]
    return j, float(np.median(members))


def iter_decode(
    B: SparseConstraintMatrix,  # noqa: N803
    z: npt.ArrayLike,
    cfg: DecoderConfig | None = None,
) -> Iterator[DecoderState]:
    """Yield the decoder state before the first step and after every update.

    The same state object is yielded each time and mutated in place between yields.
    Iteration stops once the residual is zero, no column qualifies, or the iteration
    budget is spent.
    """
    cfg = cfg or DecoderConfig()
    target = as_vector(z, length=B.m, name="z")
    threshold = cfg.zero_tol * max(1.0, float(np.max(np.abs(target), initial=0.0)))
    theta = cfg.theta_vote(B.d)
    budget = cfg.iteration_budget(B)
    hoods = _Neighborhoods.of(B)

    state = DecoderState(e_hat=np.zeros(B.n), gaps=target.copy())
    yield state
    while state.iterations < budget and np.max(np.abs(state.gaps), initial=0.0) > threshold:
        pick = _pick_column(state.gaps, hoods, theta, cfg.ratio_tol, threshold)
        if pick is None:
            return
        j, delta = pick
        rows, weights = B.column(j)
        state.e_hat[j] += delta
        state.gaps[rows] -= weights * delta
        state.iterations += 1
        yield state


def decode(B: SparseConstraintMatrix, z: npt.ArrayLike, cfg: DecoderConfig | None = None) -> DecodeResult:  # noqa: N803
    """Recover the error vector from its syndrome *z*.

    ``success`` requires ``|z - B e_hat|_inf <= zero_tol * max(1, |z|_inf)``; ``stalled``
    means no column qualified before that; ``iteration-limit`` means the budget ran out.
    """
    cfg = cfg or DecoderConfig()
    target = as_vector(z, length=B.m, name="z")
    threshold = cfg.zero_tol * max(1.0, float(np.max(np.abs(target), initial=0.0)))

    state: DecoderState | None = None
    for state in iter_decode(B, target, cfg):
        pass
    assert state is not None

    residual = float(np.max(np.abs(target - B.matvec(state.e_hat)), initial=0.0))
    status: DecodeStatus
    if residual <= threshold:
        status = "success"
    elif state.iterations >= cfg.iteration_budget(B):
        status = "iteration-limit"
    else:
        status = "stalled"
    return DecodeResult(e_hat=state.e_hat, status=status, iterations=state.iterations, residual=residual)


def recall(B: SparseConstraintMatrix, y: npt.ArrayLike, cfg: DecoderConfig | None = None) -> RecallResult:  # noqa: N803
    """Correct a noisy message: ``x_hat = y - decode(B, B y)``."""
    observed = as_vector(y, length=B.n, name="y")
    result = decode(B, syndrome(B, observed), cfg)
    return RecallResult(
        x_hat=observed - result.e_hat,
        status=result.status,
        e_hat=result.e_hat,
        iterations=result.iterations,
        residual=result.residual,
    )


@dataclass(frozen=True, slots=True)
class ExpansionReport:
    """Outcome of :func:`check_expansion`.

    ``witness`` is the first violating set in size-then-lexicographic order.
    """

    t: int
    l: float  # noqa: E741
    is_expander: bool
    witness: tuple[int, ...] | None = None
    sets_checked: int = field(default=0, compare=False)


def check_expansion(B: SparseConstraintMatrix, t: int, l: float) -> ExpansionReport:  # noqa: N803, E741
    """Verify ``|N(S)| >= l |S|`` for every column set with ``|S| <= t`` by enumeration.

    Raises:
        InstanceTooLarge: More than ten million sets would be enumerated.
    """
    if t < 0:
        raise ValueError(f"t must be >= 0, got {t}")
    limit = min(t, B.n)
    if sum(comb(B.n, s) for s in range(1, limit + 1)) > _MAX_SUBSETS:
        raise InstanceTooLarge(f"instance too large: expansion check over n={B.n}, t={t}")

    masks = [sum(1 << int(row) for row in B.column(j)[0]) for j in range(B.n)]
    checked = 0
    for size in range(1, limit + 1):
        need = l * size - 1e-9
        for subset in combinations(range(B.n), size):
            checked += 1
            union = 0
            for j in subset:
                union |= masks[j]
            if union.bit_count() < need:
                return ExpansionReport(t=t, l=l, is_expander=False, witness=subset, sets_checked=checked)
    return ExpansionReport(t=t, l=l, is_expander=True, sets_checked=checked)


def _log_binom(n: float, k: float) -> float:
    return float(gammaln(n + 1.0) - gammaln(k + 1.0) - gammaln(n - k + 1.0))


def log_expansion_term(n: int, m: int, d: int, epsilon: float, s: int) -> float:
    """Log of the bound ``C(n, s) C(m, k) (k / m)^(d s)`` with ``k = (1 - epsilon) d s``.

    Returns 0.0 (a bound of one) when ``k > m``.
    """
    k = (1.0 - epsilon) * d * s
    if k > m:
        return 0.0
    return _log_binom(n, s) + _log_binom(m, k) + d * s * log(k / m)


def expansion_failure_bound(n: int, m: int, d: int, epsilon: float, s_max: int) -> float:
    """Union bound on the probability that a random B is not an expander up to *s_max*.

    Each term is evaluated in log space and capped at one; the sum is clamped to [0, 1].
    """
    if min(n, m, d) < 1:
        raise ValueError(f"n, m, d must be positive, got {n}, {m}, {d}")
    if not 0.0 < epsilon < 1.0:
        raise ValueError(f"epsilon must lie in (0, 1), got {epsilon}")

    total = 0.0
    for s in range(1, s_max + 1):
        total += min(1.0, exp(min(0.0, log_expansion_term(n, m, d, epsilon, s))))
        if total >= 1.0:
            return 1.0
    return total
