"""
JSON reports emitted by the learn, decode and expand-check commands.
"""

from pydantic import BaseModel, Field
from submem_core import ExpansionReport, LearnReport

__all__ = ("DecodeOutput", "ExpansionOutput", "LearnOutput")


class LearnOutput(BaseModel):
    m: int
    n: int
    exact: bool | None = Field(default=None, description="Only set when a reference B was supplied")
    max_residual: float | None = None
    permutation: list[int] | None = None
    scales: list[float] | None = None
    wall_time_ms: float
    lp_count: int
    failed_lps: int
    pool_size: int

    @classmethod
    def from_report(cls, report: LearnReport) -> "LearnOutput":
        return cls(
            m=report.B_hat.shape[0],
            n=report.B_hat.shape[1],
            exact=report.exact,
            max_residual=report.max_residual,
            permutation=report.permutation,
            scales=None if report.scales is None else report.scales.tolist(),
            wall_time_ms=report.wall_time_ms,
            lp_count=report.lp_count,
            failed_lps=report.failed_lps,
            pool_size=report.pool_size,
        )


class DecodeOutput(BaseModel):
    status: str = Field(..., description="success, stalled or iteration-limit")
    iterations: int
    residual: float


class ExpansionOutput(BaseModel):
    t: int
    l: float  # noqa: E741
    is_expander: bool
    witness: list[int] | None = None
    sets_checked: int = 0

    @classmethod
    def from_report(cls, report: ExpansionReport) -> "ExpansionOutput":
        return cls(
            t=report.t,
            l=report.l,
            is_expander=report.is_expander,
            witness=None if report.witness is None else list(report.witness),
            sets_checked=report.sets_checked,
        )
