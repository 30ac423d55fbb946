"""Exact solver for the ER-SpUD row subproblem ``min |w^T U|_1  s.t.  r^T w = 1``.

The epigraph LP (variables ``w`` and ``t``, minimize ``sum t`` subject to
``-t <= U^T w <= t`` and ``r^T w = 1``) is solved through its LP dual::

    maximize  c^T y   subject to  Q U y = 0,  -1 <= y <= 1,   c = U^T r / |r|^2

where the rows of ``Q`` are an orthonormal basis of ``r``'s orthogonal complement. The dual
has ``m - 1`` equality rows and ``n`` boxed variables, so a dense bounded-variable simplex
stays small. The primal ``w = r / |r|^2 - Q^T mu`` is read back from the optimal simplex
multipliers ``mu`` and its objective re-evaluated from scratch.

Pricing is Dantzig's rule; after a run of degenerate pivots the solver switches to Bland's
smallest-index rule for the rest of the solve.
"""

from dataclasses import dataclass
from typing import Literal

import numpy as np
import numpy.typing as npt

from submem_core.types import DenseMatrix, Vector, as_dense, as_vector

__all__ = ("L1RowProblem", "LPSolution", "LPStatus", "householder_complement", "solve_l1_row")

type LPStatus = Literal["optimal", "infeasible", "unbounded", "iteration-limit"]

REDUCED_COST_TOL = 1e-10
FEASIBILITY_TOL = 1e-9
_RATIO_PIVOT_TOL = 1e-9
_DEGENERATE_RUN = 30


@dataclass(frozen=True, slots=True)
class L1RowProblem:
    """One pair subproblem: ``U`` is ``m x n``, ``r`` has length ``m``."""

    U: DenseMatrix
    r: Vector

    def __post_init__(self) -> None:
        u = as_dense(self.U, name="U", allow_empty=False)
        r = as_vector(self.r, length=u.shape[0], name="r")
        object.__setattr__(self, "U", u)
        object.__setattr__(self, "r", r)


@dataclass(frozen=True, slots=True)
class LPSolution:
    """Result of :func:`solve_l1_row`.

    ``objective`` is ``|w^T U|_1`` recomputed from the returned ``w``; ``dual_objective``
    is the value of the dual LP at the final basis.
    """

    w: Vector
    objective: float
    status: LPStatus
    iterations: int = 0
    dual_objective: float = float("nan")

    @property
    def ok(self) -> bool:
        return self.status == "optimal"


@dataclass(slots=True)
class _SimplexOutcome:
    status: LPStatus
    basis: list[int]
    at_upper: npt.NDArray[np.bool_]
    iterations: int


def householder_complement(r: Vector) -> DenseMatrix:
    """Orthonormal basis (as rows) of the complement of *r*, from one Householder reflector."""
    m = r.shape[0]
    v = r.astype(np.float64, copy=True)
    v[0] += (1.0 if r[0] >= 0 else -1.0) * float(np.linalg.norm(r))
    reflector = np.eye(m) - 2.0 * np.outer(v, v) / float(v @ v)
    return reflector[1:]


def _values(upper: Vector, at_upper: npt.NDArray[np.bool_], basis: list[int]) -> Vector:
    x = np.where(at_upper, upper, 0.0)
    x[basis] = 0.0
    return x


def _bounded_simplex(
    A: DenseMatrix,  # noqa: N803
    b: Vector,
    cost: Vector,
    upper: Vector,
    basis: list[int],
    at_upper: npt.NDArray[np.bool_],
    max_iterations: int,
) -> _SimplexOutcome:
    """Minimize ``cost^T x`` s.t. ``A x = b``, ``0 <= x <= upper`` from a feasible basis."""
    basis = list(basis)
    at_upper = at_upper.copy()
    movable = upper > 0
    bland = False
    degenerate = 0

    for iteration in range(max_iterations):
        basis_matrix = A[:, basis]
        x_basic = np.linalg.solve(basis_matrix, b - A @ _values(upper, at_upper, basis))
        multipliers = np.linalg.solve(basis_matrix.T, cost[basis])
        reduced = cost - A.T @ multipliers
        reduced[basis] = 0.0

        improving = np.where(at_upper, reduced > REDUCED_COST_TOL, reduced < -REDUCED_COST_TOL)
        candidates = movable & improving
        candidates[basis] = False
        if not candidates.any():
            return _SimplexOutcome("optimal", basis, at_upper, iteration)

        eligible = np.flatnonzero(candidates)
        entering = int(eligible[0]) if bland else int(eligible[np.argmax(np.abs(reduced[eligible]))])
        direction = -1.0 if at_upper[entering] else 1.0
        rate = -direction * np.linalg.solve(basis_matrix, A[:, entering])

        step = float(upper[entering])
        leaving: int | None = None
        basic_upper = upper[basis]
        for pos in range(len(basis)):
            if rate[pos] < -_RATIO_PIVOT_TOL:
                limit = max(0.0, x_basic[pos]) / -rate[pos]
            elif rate[pos] > _RATIO_PIVOT_TOL and np.isfinite(basic_upper[pos]):
                limit = max(0.0, basic_upper[pos] - x_basic[pos]) / rate[pos]
            else:
                continue
            if limit < step - 1e-15 or (leaving is not None and limit <= step + 1e-15 and basis[pos] < basis[leaving]):
                step, leaving = limit, pos

        if not np.isfinite(step):
            return _SimplexOutcome("unbounded", basis, at_upper, iteration)

        if leaving is None:
            at_upper[entering] = not at_upper[entering]
        else:
            at_upper[basis[leaving]] = bool(rate[leaving] > 0)
            basis[leaving] = entering
            at_upper[entering] = False

        degenerate = degenerate + 1 if step <= REDUCED_COST_TOL else 0
        if degenerate >= _DEGENERATE_RUN:
            bland = True

    return _SimplexOutcome("iteration-limit", basis, at_upper, max_iterations)


def _drive_out_artificials(A: DenseMatrix, outcome: _SimplexOutcome, n: int) -> None:  # noqa: N803
    """Swap zero-level artificials out of the phase-one basis where a structural column allows.

    The pivots are degenerate, so the primal point is unchanged; the structural basis
    makes the recovered ``w`` a vertex of the epigraph LP.
    """
    for pos in range(len(outcome.basis)):
        if outcome.basis[pos] < n:
            continue
        row = np.linalg.solve(A[:, outcome.basis].T, np.eye(len(outcome.basis))[pos]) @ A[:, :n]
        row[[j for j in outcome.basis if j < n]] = 0.0
        j = int(np.argmax(np.abs(row)))
        if abs(row[j]) > _RATIO_PIVOT_TOL:
            outcome.at_upper[outcome.basis[pos]] = False
            outcome.basis[pos] = j


def solve_l1_row(problem: L1RowProblem, max_iterations: int | None = None) -> LPSolution:
    """Globally minimize ``|w^T U|_1`` subject to ``r^T w = 1``."""
    U, r = problem.U, problem.r  # noqa: N806
    m, n = U.shape
    r_norm_sq = float(r @ r)
    if r_norm_sq == 0.0:
        return LPSolution(w=np.zeros(m), objective=float("nan"), status="infeasible")

    anchor = r / r_norm_sq
    gain = U.T @ anchor

    if m == 1:
        objective = float(np.abs(gain).sum())
        return LPSolution(w=anchor, objective=objective, status="optimal", dual_objective=objective)

    Q = householder_complement(r)  # noqa: N806
    QU = Q @ U  # noqa: N806
    p = QU.shape[0]
    budget = max_iterations or 50 * (p + n)

    # Shift y = z - 1 so that 0 <= z <= 2 and flip rows to make the right-hand side nonnegative.
    rhs = QU.sum(axis=1)
    signs = np.where(rhs < 0, -1.0, 1.0)
    A = np.hstack([signs[:, None] * QU, np.eye(p)])  # noqa: N806
    b = signs * rhs
    upper = np.concatenate([np.full(n, 2.0), np.full(p, np.inf)])
    basis = list(range(n, n + p))
    at_upper = np.zeros(n + p, dtype=bool)

    phase_one = _bounded_simplex(A, b, np.concatenate([np.zeros(n), np.ones(p)]), upper, basis, at_upper, budget)
    iterations = phase_one.iterations
    if phase_one.status != "optimal":
        return LPSolution(w=np.zeros(m), objective=float("nan"), status=phase_one.status, iterations=iterations)

    _drive_out_artificials(A, phase_one, n)
    upper[n:] = 0.0
    cost = np.concatenate([-gain, np.zeros(p)])
    phase_two = _bounded_simplex(
        A, b, cost, upper, phase_one.basis, phase_one.at_upper, max(budget - iterations, 1)
    )
    iterations += phase_two.iterations
    if phase_two.status != "optimal":
        return LPSolution(w=np.zeros(m), objective=float("nan"), status=phase_two.status, iterations=iterations)

    basis_matrix = A[:, phase_two.basis]
    x_basic = np.linalg.solve(basis_matrix, b - A @ _values(upper, phase_two.at_upper, phase_two.basis))
    if np.any(x_basic[np.asarray(phase_two.basis) >= n] > FEASIBILITY_TOL * max(1.0, float(np.abs(b).max()))):
        return LPSolution(w=np.zeros(m), objective=float("nan"), status="infeasible", iterations=iterations)

    multipliers = np.linalg.solve(basis_matrix.T, cost[phase_two.basis])
    w = anchor + Q.T @ (signs * multipliers)

    z = _values(upper, phase_two.at_upper, phase_two.basis)
    z[phase_two.basis] = x_basic
    y = z[:n] - 1.0
    return LPSolution(
        w=w,
        objective=float(np.abs(U.T @ w).sum()),
        status="optimal",
        iterations=iterations,
        dual_objective=float(gain @ y),
    )
