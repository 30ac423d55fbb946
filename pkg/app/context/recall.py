"""
Recall MCP server.

Matrices travel in the sparse text format (``sparse <m> <n> <d>`` header, then one
``<row> <col> <weight>`` line per entry); vectors as plain JSON lists.
"""

import asyncio
from typing import Annotated, Any

from fastmcp import FastMCP
from fastmcp.exceptions import ToolError
from pydantic import ValidationError
from submem_core import (
    DecoderConfig,
    SparseConstraintMatrix,
    SubmemError,
    check_expansion,
    decode as decode_syndrome,
    expansion_failure_bound,
    recall as recall_message,
)
from submem_core.formats import loads_sparse

from app.core.config import settings
from app.core.log import logger, new_run_id
from app.schema.experiment import ExperimentConfig
from app.schema.reports import DecodeOutput, ExpansionOutput
from app.util.experiment import run_recall_experiment

__all__ = ["server"]

server = FastMCP("Recall Tools")


def _matrix(text: str) -> SparseConstraintMatrix:
    try:
        return loads_sparse(text)
    except SubmemError as e:
        raise ToolError(f"invalid B: {e}") from e


def _decoder_config(epsilon: float | None, max_iterations: int | None) -> DecoderConfig:
    tol = settings.tolerances
    try:
        return DecoderConfig(
            epsilon=settings.DECODER_EPSILON if epsilon is None else epsilon,
            max_iterations=max_iterations,
            ratio_tol=tol.ratio_tol,
            zero_tol=tol.zero_tol,
        )
    except ValueError as e:
        raise ToolError(str(e)) from e


@server.tool(tags={"recall"})
async def decode(
    B: Annotated[str, "Constraint matrix in sparse text format"],  # noqa: N803
    z: Annotated[list[float], "Syndrome B e, one value per constraint"],
    epsilon: Annotated[float | None, "Expansion slack in (0, 0.25]"] = None,
    max_iterations: Annotated[int | None, "Update step budget"] = None,
) -> dict[str, Any]:
    """
    Recover a sparse error vector from its syndrome.

    Returns:
        dict[str, Any]: status, iterations, residual and the estimated error ``e_hat``.
    """
    new_run_id("recall_decode")
    matrix = _matrix(B)
    cfg = _decoder_config(epsilon, max_iterations)
    try:
        result = await asyncio.to_thread(decode_syndrome, matrix, z, cfg)
    except ValueError as e:
        raise ToolError(str(e)) from e
    logger.info(f"decode: {result.status} after {result.iterations} steps")
    output = DecodeOutput(status=result.status, iterations=result.iterations, residual=result.residual)
    return {**output.model_dump(), "e_hat": result.e_hat.tolist()}


@server.tool(tags={"recall"})
async def recall(
    B: Annotated[str, "Constraint matrix in sparse text format"],  # noqa: N803
    y: Annotated[list[float], "Corrupted message"],
    epsilon: Annotated[float | None, "Expansion slack in (0, 0.25]"] = None,
    max_iterations: Annotated[int | None, "Update step budget"] = None,
) -> dict[str, Any]:
    """
    Correct a corrupted message: ``x_hat = y - e_hat`` with ``e_hat`` decoded from ``B y``.

    Returns:
        dict[str, Any]: status, iterations, residual and the corrected message ``x_hat``.
    """
    new_run_id("recall_recall")
    matrix = _matrix(B)
    cfg = _decoder_config(epsilon, max_iterations)
    try:
        result = await asyncio.to_thread(recall_message, matrix, y, cfg)
    except ValueError as e:
        raise ToolError(str(e)) from e
    logger.info(f"recall: {result.status} after {result.iterations} steps")
    output = DecodeOutput(status=result.status, iterations=result.iterations, residual=result.residual)
    return {**output.model_dump(), "x_hat": result.x_hat.tolist()}


@server.tool(tags={"recall", "expansion"})
async def expand_check(
    B: Annotated[str, "Constraint matrix in sparse text format"],  # noqa: N803
    t: Annotated[int, "Largest column set size"],
    l: Annotated[float, "Required neighbors per column"],  # noqa: E741
) -> dict[str, Any]:
    """
    Check that every set of at most ``t`` columns has at least ``l |S|`` neighbor rows.
    """
    new_run_id("recall_expand_check")
    matrix = _matrix(B)
    try:
        report = await asyncio.to_thread(check_expansion, matrix, t, l)
    except ValueError as e:
        raise ToolError(str(e)) from e
    return ExpansionOutput.from_report(report).model_dump()


@server.tool(tags={"recall", "expansion"})
async def failure_bound(
    n: Annotated[int, "Message length"],
    m: Annotated[int, "Constraint count"],
    d: Annotated[int, "Row draws per column"],
    epsilon: Annotated[float, "Expansion slack"] = 0.25,
    s_max: Annotated[int, "Largest set size in the union bound"] = 1,
) -> dict[str, float]:
    """
    Union bound on the probability that a random B fails to expand on sets up to ``s_max``.
    """
    try:
        bound = expansion_failure_bound(n, m, d, epsilon, s_max)
    except ValueError as e:
        raise ToolError(str(e)) from e
    return {"bound": bound}


@server.tool(tags={"recall", "experiment"})
async def simulate(
    config: Annotated[dict[str, Any], "ExperimentConfig fields; omitted fields take their defaults"],
) -> dict[str, Any]:
    """
    Run a failure-curve experiment and return its rows and metadata.

    Keep the sizes small: the call blocks until every trial has been decoded.
    """
    new_run_id("recall_simulate")
    try:
        cfg = ExperimentConfig.model_validate(config)
    except ValidationError as e:
        raise ToolError(f"invalid experiment config: {e}") from e
    logger.info(f"simulate: m={cfg.m}, n={cfg.n}, d={cfg.d}, E={cfg.error_counts}")
    result = await asyncio.to_thread(run_recall_experiment, cfg)
    return result.model_dump(mode="json")
