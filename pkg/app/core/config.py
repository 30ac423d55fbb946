"""
Config Maker
"""

# pyright: basic

__all__ = ("Settings", "settings")

from typing import Literal

from pydantic import Field
from pydantic_settings import BaseSettings
from submem_core import TolerancePolicy

from app import __project__, __version__


class Settings(BaseSettings):
    PROJECT_NAME: str = __project__
    PROJECT_VERSION: str = __version__
    DEBUG: bool = False
    LOG_MESSAGE_MAX_LEN: int = 2000

    APP_HOST: str = "0.0.0.0"
    APP_PORT: int = 4202
    TRANSPORT: Literal["stdio", "http", "sse", "streamable-http"] = "stdio"

    THREADS: int = Field(default=1, ge=1)

    RANK_TOL: float = Field(default=1e-9, gt=0, lt=1)
    ZERO_TOL: float = Field(default=1e-9, gt=0, lt=1)
    RATIO_TOL: float = Field(default=1e-9, gt=0, lt=1)
    SPARSITY_TOL: float = Field(default=1e-8, gt=0, lt=1)
    MATCH_TOL: float = Field(default=1e-7, gt=0)

    LP_MAX_ITERATIONS: int = Field(default=0, ge=0)  # 0 = 50 * (rows + columns) per LP
    DECODER_EPSILON: float = Field(default=0.25, gt=0, le=0.25)
    TRIALS_PER_E: int = Field(default=100, ge=1)

    class Config:
        env_file = ".env"
        env_prefix = "SUBMEM_"
        env_file_encoding = "utf-8"
        extra = "ignore"
        case_sensitive = True
        validate_assignment = True

    @property
    def tolerances(self) -> TolerancePolicy:
        return TolerancePolicy(
            rank_tol=self.RANK_TOL,
            zero_tol=self.ZERO_TOL,
            ratio_tol=self.RATIO_TOL,
            sparsity_tol=self.SPARSITY_TOL,
        )


settings = Settings()
