"""
Experiment harness: learn-then-recall failure curves and learning sweeps.

Every random draw is seeded from the master seed through ``SeedSequence(seed, spawn_key)``
so adding E values or trials never perturbs the draws of earlier ones, and threaded
runs aggregate to the same numbers as serial ones.
"""

import csv
import dataclasses
from collections.abc import Sequence
from concurrent.futures import ThreadPoolExecutor
from math import ceil, log
from pathlib import Path
from time import perf_counter

import numpy as np
from sklearn.isotonic import IsotonicRegression
from submem_core import (
    DecoderConfig,
    ERSpUDConfig,
    FormatError,
    ReportWriteError,
    SparseConstraintMatrix,
    SubmemError,
    WeightLaw,
    __version__ as core_version,
    decode,
    generate_B,
    generate_error,
    learn_constraints,
    sample_until_stable,
    syndrome,
)

from app.core.config import settings
from app.core.log import logger
from app.schema.experiment import ExperimentConfig, ExperimentMeta, ExperimentResult, ExperimentRow, SweepRow

__all__ = (
    "CSV_HEADER",
    "crossing_threshold",
    "derive_seed",
    "emit_csv",
    "emit_sweep_csv",
    "read_csv",
    "run_learning_sweep",
    "run_recall_experiment",
    "smooth_failure_curve",
)

CSV_HEADER = ("E", "trials", "failures", "failure_fraction", "mean_iterations", "mean_decode_ms")

_KEY_B = 0
_KEY_SAMPLES = 1
_KEY_PAIRS = 2
_KEY_TRIAL = 3


def derive_seed(master: int, *key: int) -> int:
    """64-bit child seed of *master* along *key*."""
    sequence = np.random.SeedSequence(master, spawn_key=key)
    return int(sequence.generate_state(1, dtype=np.uint64)[0])


@dataclasses.dataclass(frozen=True, slots=True)
class _Trial:
    success: bool
    iterations: int
    decode_ms: float


def _learn_decoder_matrix(
    cfg: ExperimentConfig,
    B: SparseConstraintMatrix,  # noqa: N803
    meta: ExperimentMeta,
) -> SparseConstraintMatrix | None:
    """Learn B_hat from sampled messages; ``None`` (and an aborted meta) on failure."""
    tol = settings.tolerances
    samples = sample_until_stable(B, WeightLaw.parse(cfg.coeff_law), derive_seed(cfg.seed, _KEY_SAMPLES), tol)
    logger.info(f"Learning B_hat from {samples.shape[0]} samples")

    learn_cfg = ERSpUDConfig(
        pair_budget=cfg.pair_budget,
        parallel=cfg.threads > 1,
        threads=cfg.threads,
        seed=derive_seed(cfg.seed, _KEY_PAIRS),
        match_tol=settings.MATCH_TOL,
        lp_max_iterations=settings.LP_MAX_ITERATIONS or None,
    )
    try:
        report = learn_constraints(samples, cfg.m, learn_cfg, tol, reference=B.to_dense())
        learned = SparseConstraintMatrix.from_dense(report.B_hat, zero_tol=tol.sparsity_tol)
        learned = dataclasses.replace(learned, d=max(learned.d, cfg.d))
    except (SubmemError, ValueError) as exc:
        logger.error(f"Learning failed, aborting experiment: {exc}")
        meta.learn_error = str(exc)
        meta.aborted = True
        return None

    meta.learn_exact = report.exact
    meta.learn_max_residual = report.max_residual
    meta.B_hat_checksum = learned.checksum()
    logger.info(
        f"Learned B_hat in {report.wall_time_ms:.0f} ms: exact={report.exact}, "
        f"max_residual={report.max_residual:.3g}, lp_count={report.lp_count}, failed_lps={report.failed_lps}"
    )
    return learned


def run_recall_experiment(cfg: ExperimentConfig) -> ExperimentResult:
    """
    Run the failure-curve experiment described by *cfg*.

    One B is drawn; when ``cfg.learned`` it is learned back from sampled messages and the
    estimate decodes. For each E, ``trials_per_E`` seeded errors of weight E are planted and
    decoded from their syndrome. A trial fails unless the decoder reports success and
    ``|e_hat - e|_inf <= zero_tol * max(1, |e|_inf)``.
    """
    tol = settings.tolerances
    B = generate_B(cfg.m, cfg.n, cfg.d, WeightLaw.parse(cfg.weight_law), derive_seed(cfg.seed, _KEY_B))
    meta = ExperimentMeta(config=cfg, core_version=core_version, B_checksum=B.checksum())
    logger.info(f"Generated B: m={B.m}, n={B.n}, d={B.d}, nnz={B.nnz}, checksum={meta.B_checksum}")

    decoder_B = B  # noqa: N806
    if cfg.learned:
        learned = _learn_decoder_matrix(cfg, B, meta)
        if learned is None:
            return ExperimentResult(rows=[], meta=meta)
        decoder_B = learned  # noqa: N806

    def run_trial(job: tuple[int, int]) -> _Trial:
        E, t = job  # noqa: N806
        e = generate_error(cfg.n, E, cfg.error_magnitude, derive_seed(cfg.seed, _KEY_TRIAL, E, t))
        budget = cfg.max_iterations
        if budget is None:
            budget = max(DecoderConfig().iteration_budget(decoder_B), 2 * E)
        decoder_cfg = DecoderConfig(
            epsilon=cfg.epsilon,
            max_iterations=budget,
            ratio_tol=tol.ratio_tol,
            zero_tol=tol.zero_tol,
        )

        started = perf_counter()
        result = decode(decoder_B, syndrome(decoder_B, e), decoder_cfg)
        elapsed = (perf_counter() - started) * 1000.0 if cfg.timing else 0.0

        miss = float(np.max(np.abs(result.e_hat - e)))
        limit = tol.zero_tol * max(1.0, float(np.max(np.abs(e))))
        success = result.status == "success" and miss <= limit
        logger.debug(f"E={E} t={t}: status={result.status}, iterations={result.iterations}, miss={miss:.3g}")
        return _Trial(success=success, iterations=result.iterations, decode_ms=elapsed)

    jobs = [(E, t) for E in cfg.error_counts for t in range(cfg.trials_per_E)]
    if cfg.threads > 1:
        with ThreadPoolExecutor(max_workers=cfg.threads) as pool:
            trials = list(pool.map(run_trial, jobs, chunksize=16))
    else:
        trials = [run_trial(job) for job in jobs]

    rows = []
    for index, E in enumerate(cfg.error_counts):  # noqa: N806
        batch = trials[index * cfg.trials_per_E : (index + 1) * cfg.trials_per_E]
        failures = sum(not trial.success for trial in batch)
        row = ExperimentRow(
            E=E,
            trials=len(batch),
            failures=failures,
            failure_fraction=failures / len(batch),
            mean_iterations=sum(trial.iterations for trial in batch) / len(batch),
            mean_decode_ms=sum(trial.decode_ms for trial in batch) / len(batch),
        )
        logger.info(f"E={E}: {failures}/{len(batch)} failed, mean_iterations={row.mean_iterations:.2f}")
        rows.append(row)

    return ExperimentResult(rows=rows, meta=meta)


def run_learning_sweep(
    m_list: Sequence[int],
    c_list: Sequence[float],
    d: int,
    law: WeightLaw,
    trials: int,
    seed: int,
    *,
    pair_budget: int | None = None,
    threads: int = 1,
) -> list[SweepRow]:
    """
    Exact-recovery frequency of constraint learning at ``n = ceil(c m ln m)``.

    Runs that raise count as inexact and are tallied in ``failed``; the median wall time is
    taken over runs that returned a report.
    """
    if not m_list or not c_list:
        raise ValueError("m_list and c_list must be nonempty")
    if trials < 1:
        raise ValueError(f"trials must be >= 1, got {trials}")

    tol = settings.tolerances
    table: list[SweepRow] = []
    for i, m in enumerate(m_list):
        for j, c in enumerate(c_list):
            n = max(m + 1, ceil(c * m * log(m))) if m > 1 else max(2, ceil(c))
            exact = failed = 0
            times: list[float] = []
            for t in range(trials):
                B = generate_B(m, n, d, law, derive_seed(seed, _KEY_B, i, j, t))
                cfg = ERSpUDConfig(
                    pair_budget=pair_budget,
                    parallel=threads > 1,
                    threads=threads,
                    seed=derive_seed(seed, _KEY_PAIRS, i, j, t),
                    match_tol=settings.MATCH_TOL,
                    lp_max_iterations=settings.LP_MAX_ITERATIONS or None,
                )
                try:
                    samples = sample_until_stable(B, seed=derive_seed(seed, _KEY_SAMPLES, i, j, t), tol=tol)
                    report = learn_constraints(samples, m, cfg, tol, reference=B.to_dense())
                except SubmemError as exc:
                    logger.debug(f"m={m} c={c} t={t}: {exc}")
                    failed += 1
                    continue
                exact += bool(report.exact)
                times.append(report.wall_time_ms)

            row = SweepRow(
                m=m,
                c=c,
                n=n,
                trials=trials,
                exact=exact,
                failed=failed,
                exact_frequency=exact / trials,
                median_wall_time_ms=float(np.median(times)) if times else 0.0,
            )
            logger.info(f"m={m} c={c} n={n}: exact {exact}/{trials}, failed {failed}")
            table.append(row)
    return table


def _write_rows(path: Path, header: Sequence[str], rows: list[list]) -> None:
    try:
        with path.open("w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(header)
            writer.writerows(rows)
    except OSError as exc:
        raise ReportWriteError(f"cannot write {path}: {exc}") from exc


def emit_csv(result: ExperimentResult, path: str | Path) -> Path:
    """Write *result* as CSV plus a ``.json`` metadata sidecar; returns the sidecar path."""
    path = Path(path)
    _write_rows(path, CSV_HEADER, [[getattr(row, field) for field in CSV_HEADER] for row in result.rows])

    sidecar = path.with_suffix(".json")
    try:
        sidecar.write_text(result.meta.model_dump_json(indent=2) + "\n", encoding="utf-8")
    except OSError as exc:
        raise ReportWriteError(f"cannot write {sidecar}: {exc}") from exc
    logger.info(f"Wrote {len(result.rows)} rows to {path} (metadata: {sidecar})")
    return sidecar


def emit_sweep_csv(rows: Sequence[SweepRow], path: str | Path) -> None:
    fields = tuple(SweepRow.model_fields)
    _write_rows(Path(path), fields, [[getattr(row, field) for field in fields] for row in rows])


def read_csv(path: str | Path) -> list[ExperimentRow]:
    """Parse a CSV written by :func:`emit_csv`."""
    path = Path(path)
    try:
        with path.open(newline="", encoding="utf-8") as fh:
            reader = csv.DictReader(fh)
            if tuple(reader.fieldnames or ()) != CSV_HEADER:
                raise FormatError(f"{path}: unexpected header {reader.fieldnames}")
            return [ExperimentRow.model_validate(record) for record in reader]
    except OSError as exc:
        raise FormatError(f"cannot read {path}: {exc}") from exc


def smooth_failure_curve(rows: Sequence[ExperimentRow]) -> list[tuple[int, float]]:
    """Non-decreasing isotonic fit of failure fraction against E, weighted by trial count."""
    ordered = sorted((row for row in rows if row.trials), key=lambda row: row.E)
    if not ordered:
        return []
    fitted = IsotonicRegression(increasing=True, y_min=0.0, y_max=1.0).fit_transform(
        [row.E for row in ordered],
        [row.failure_fraction for row in ordered],
        sample_weight=[row.trials for row in ordered],
    )
    return [(row.E, float(value)) for row, value in zip(ordered, fitted, strict=True)]


def crossing_threshold(rows: Sequence[ExperimentRow], level: float = 0.5) -> int | None:
    """Smallest E whose smoothed failure fraction exceeds *level*."""
    for E, value in smooth_failure_curve(rows):  # noqa: N806
        if value > level:
            return E
    return None
