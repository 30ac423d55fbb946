"""
Experiment configuration and result models.
"""

from typing import Self

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator
from submem_core import WeightLaw

__all__ = (
    "ExperimentConfig",
    "ExperimentMeta",
    "ExperimentResult",
    "ExperimentRow",
    "SweepRow",
)


class ExperimentConfig(BaseModel):
    """
    Recall experiment: one B, then ``trials_per_E`` planted errors for every E.
    """

    model_config = ConfigDict(extra="forbid")

    m: int = Field(default=100, ge=1, description="Constraint count")
    n: int = Field(default=800, ge=1, description="Message length")
    d: int = Field(default=3, ge=1, description="Row draws per column")
    weight_law: str = Field(default="int:3", description="Constraint weight law: int:L, gauss:sigma or rademacher")
    coeff_law: str = Field(default="gauss:1", description="Law of the dataset sample coefficients")
    error_magnitude: int = Field(default=4, ge=1, description="Error values are uniform over +-1..+-L")
    error_counts: list[int] = Field(default_factory=lambda: list(range(31)), description="E values to sweep")
    trials_per_E: int = Field(default=100, ge=1, description="Independent trials per E")  # noqa: N815
    seed: int = Field(default=0, ge=0, lt=2**64, description="Master seed")
    epsilon: float = Field(default=0.25, gt=0, le=0.25, description="Decoder expansion slack")
    use_learned_B: bool = Field(default=True, description="Decode with the learned B_hat")  # noqa: N815
    true_B: bool = Field(default=False, description="Decode with the true B; wins over use_learned_B")  # noqa: N815
    pair_budget: int | None = Field(default=None, ge=0, description="Column pairs solved by ER-SpUD; None = all")
    max_iterations: int | None = Field(default=None, ge=0, description="Decoder step budget; None = per-E default")
    threads: int = Field(default=1, ge=1, description="Worker threads for trials and the pair loop")
    timing: bool = Field(default=True, description="Record mean_decode_ms; off makes results byte-stable")

    @field_validator("weight_law", "coeff_law")
    @classmethod
    def normalize_law(cls, value: str) -> str:
        return str(WeightLaw.parse(value))

    @model_validator(mode="after")
    def check_counts(self) -> Self:
        bad = [e for e in self.error_counts if not 0 <= e <= self.n]
        if bad:
            raise ValueError(f"error counts must lie in [0, {self.n}], got {bad}")
        return self

    @property
    def learned(self) -> bool:
        return self.use_learned_B and not self.true_B


class ExperimentRow(BaseModel):
    E: int = Field(..., ge=0)  # noqa: N815
    trials: int = Field(..., ge=0)
    failures: int = Field(..., ge=0)
    failure_fraction: float = Field(..., ge=0, le=1)
    mean_iterations: float = Field(default=0.0, ge=0)
    mean_decode_ms: float = Field(default=0.0, ge=0)

    @model_validator(mode="after")
    def check_fraction(self) -> Self:
        expected = self.failures / self.trials if self.trials else 0.0
        if self.failure_fraction != expected:
            raise ValueError(f"failure_fraction {self.failure_fraction} != {self.failures}/{self.trials}")
        return self


class ExperimentMeta(BaseModel):
    config: ExperimentConfig
    core_version: str
    B_checksum: str = Field(..., description="blake2s of the generated B")  # noqa: N815
    B_hat_checksum: str | None = Field(default=None, description="blake2s of the decoding B_hat")  # noqa: N815
    learn_exact: bool | None = None
    learn_max_residual: float | None = None
    learn_error: str | None = Field(default=None, description="Set when learning failed and the run was aborted")
    aborted: bool = False
    seed_scheme: str = "SeedSequence(seed, spawn_key): B=(0,), samples=(1,), pairs=(2,), trial=(3, E, t)"


class ExperimentResult(BaseModel):
    rows: list[ExperimentRow] = Field(default_factory=list)
    meta: ExperimentMeta


class SweepRow(BaseModel):
    """
    Exact-recovery frequency of the learning phase at n = ceil(c m ln m).
    """

    m: int
    c: float
    n: int
    trials: int
    exact: int
    failed: int = Field(default=0, description="Runs that raised instead of returning a report")
    exact_frequency: float
    median_wall_time_ms: float
