"""
Command line
"""

import argparse
import json
import sys
from collections.abc import Callable, Sequence
from pathlib import Path

from pydantic import ValidationError
from submem_core import (
    DecoderConfig,
    DegenerateParameters,
    ERSpUDConfig,
    FormatError,
    ReportWriteError,
    SparseConstraintMatrix,
    SubmemError,
    WeightLaw,
    check_expansion,
    enumerate_binary_nullspace,
    exhaustive_sparse_basis,
    generate_B,
    learn_constraints,
    recall,
    sample_dataset,
    sample_until_stable,
)
from submem_core.formats import (
    dumps_dense,
    dumps_sparse,
    read_dense,
    read_sparse,
    read_vector,
    write_dense,
    write_sparse,
    write_vector,
)

from app import __version__
from app.core import log
from app.core.config import settings
from app.core.log import logger
from app.schema.experiment import ExperimentConfig
from app.schema.reports import DecodeOutput, ExpansionOutput, LearnOutput
from app.util.experiment import (
    derive_seed,
    emit_csv,
    emit_sweep_csv,
    run_learning_sweep,
    run_recall_experiment,
)

__all__ = ("build_parser", "main")

EXIT_OK = 0
EXIT_ABORTED = 1
EXIT_ERROR = 2


def parse_counts(text: str) -> list[int]:
    """``"0-5,8,10-12"`` -> ``[0, 1, 2, 3, 4, 5, 8, 10, 11, 12]``."""
    counts: list[int] = []
    try:
        for part in text.split(","):
            lo, sep, hi = part.strip().partition("-")
            counts.extend(range(int(lo), int(hi) + 1) if sep else [int(lo)])
    except ValueError as e:
        raise argparse.ArgumentTypeError(f"invalid count list {text!r}") from e
    return counts


def _list_of(cast: Callable[[str], int | float]) -> Callable[[str], list]:
    def parse(text: str) -> list:
        try:
            return [cast(token) for token in text.split(",") if token.strip()]
        except ValueError as e:
            raise argparse.ArgumentTypeError(f"invalid list {text!r}") from e

    return parse


def _emit(text: str, out: Path | None) -> None:
    if out is None:
        sys.stdout.write(text)
        return
    try:
        out.write_text(text, encoding="utf-8", newline="\n")
    except OSError as e:
        raise ReportWriteError(f"cannot write {out}: {e.strerror or e}") from e


def _learn_config(args: argparse.Namespace) -> ERSpUDConfig:
    return ERSpUDConfig(
        pair_budget=args.pair_budget,
        parallel=settings.THREADS > 1,
        threads=settings.THREADS,
        seed=derive_seed(args.seed, 2),
        match_tol=settings.MATCH_TOL,
        lp_max_iterations=settings.LP_MAX_ITERATIONS or None,
    )


def cmd_gen(args: argparse.Namespace) -> int:
    B = generate_B(args.m, args.n, args.d, args.law, derive_seed(args.seed, 0))
    logger.info(f"Generated B: m={B.m}, n={B.n}, d={B.d}, nnz={B.nnz}, checksum={B.checksum()}")
    _emit(dumps_sparse(B), args.out)
    if args.samples:
        samples = sample_dataset(B, args.samples, args.coeff_law, derive_seed(args.seed, 1), settings.tolerances)
        write_dense(args.samples_out, samples)
        logger.info(f"Wrote {args.samples} samples to {args.samples_out}")
    return EXIT_OK


def cmd_learn(args: argparse.Namespace) -> int:
    tol = settings.tolerances
    if args.samples is not None:
        samples = read_dense(args.samples)
        reference = None if args.reference is None else read_sparse(args.reference).to_dense()
        d = args.d
    else:
        if args.n is None:
            raise DegenerateParameters("learn needs --samples or a generator spec (--n, --d, --law)")
        B = generate_B(args.m, args.n, args.d, args.law, derive_seed(args.seed, 0))
        samples = sample_until_stable(B, seed=derive_seed(args.seed, 1), tol=tol)
        reference, d = B.to_dense(), B.d
        logger.info(f"Generated B and {samples.shape[0]} samples")

    report = learn_constraints(samples, args.m, _learn_config(args), tol, reference=reference)
    logger.info(f"Learning finished in {report.wall_time_ms:.0f} ms over {report.lp_count} LPs")

    try:
        learned = SparseConstraintMatrix.from_dense(report.B_hat, zero_tol=tol.sparsity_tol)
        if d is not None and learned.d < d:
            learned = SparseConstraintMatrix.from_dense(report.B_hat, d, zero_tol=tol.sparsity_tol)
        write_sparse(args.out, learned)
    except ValueError as e:
        if isinstance(e, SubmemError):
            raise
        logger.warning(f"B_hat is not a valid sparse constraint matrix ({e}); writing it dense")
        write_dense(args.out, report.B_hat)

    _emit(LearnOutput.from_report(report).model_dump_json() + "\n", None)
    return EXIT_OK


def cmd_decode(args: argparse.Namespace) -> int:
    B = read_sparse(args.B)
    y = read_vector(args.y)
    tol = settings.tolerances
    cfg = DecoderConfig(
        epsilon=args.epsilon if args.epsilon is not None else settings.DECODER_EPSILON,
        max_iterations=args.max_iters,
        ratio_tol=tol.ratio_tol,
        zero_tol=tol.zero_tol,
    )
    result = recall(B, y, cfg)
    logger.info(f"Decode {result.status} after {result.iterations} steps")
    write_vector(args.out, result.x_hat)
    output = DecodeOutput(status=result.status, iterations=result.iterations, residual=result.residual)
    _emit(output.model_dump_json() + "\n", None)
    return EXIT_OK


def cmd_expand_check(args: argparse.Namespace) -> int:
    report = check_expansion(read_sparse(args.B), args.t, args.l)
    logger.info(f"Checked {report.sets_checked} column sets")
    _emit(ExpansionOutput.from_report(report).model_dump_json() + "\n", args.out)
    return EXIT_OK


def _experiment_config(args: argparse.Namespace) -> ExperimentConfig:
    data: dict = {}
    if args.config is not None:
        try:
            data = json.loads(args.config.read_text(encoding="utf-8"))
        except OSError as e:
            raise FormatError(f"cannot read {args.config}: {e.strerror or e}") from e
        except json.JSONDecodeError as e:
            raise FormatError(f"{args.config}: invalid JSON ({e})") from e
        if not isinstance(data, dict):
            raise FormatError(f"{args.config}: expected a JSON object")
    data.setdefault("trials_per_E", settings.TRIALS_PER_E)
    data.setdefault("epsilon", settings.DECODER_EPSILON)
    data.setdefault("threads", settings.THREADS)

    overrides = {
        "m": args.m,
        "n": args.n,
        "d": args.d,
        "weight_law": args.law,
        "coeff_law": args.coeff_law,
        "error_magnitude": args.magnitude,
        "error_counts": args.E,
        "trials_per_E": args.trials,
        "epsilon": args.epsilon,
        "pair_budget": args.pair_budget,
        "max_iterations": args.max_iters,
        "seed": args.global_seed,
        "threads": args.global_threads,
    }
    data.update({key: value for key, value in overrides.items() if value is not None})
    if args.true_B:
        data["true_B"] = True
    if args.no_timing:
        data["timing"] = False
    return ExperimentConfig.model_validate(data)


def cmd_simulate(args: argparse.Namespace) -> int:
    cfg = _experiment_config(args)
    logger.info(f"Experiment: {cfg.model_dump_json()}")
    result = run_recall_experiment(cfg)
    emit_csv(result, args.out or Path("results.csv"))
    if result.meta.aborted:
        logger.warning(f"Experiment aborted: {result.meta.learn_error}")
        return EXIT_ABORTED
    return EXIT_OK


def cmd_sweep_learning(args: argparse.Namespace) -> int:
    rows = run_learning_sweep(
        args.m_list,
        args.c_list,
        args.d,
        args.law,
        args.trials,
        args.seed,
        pair_budget=args.pair_budget,
        threads=settings.THREADS,
    )
    emit_sweep_csv(rows, args.out or Path("sweep.csv"))
    return EXIT_OK


def cmd_sparse_search(args: argparse.Namespace) -> int:
    basis = exhaustive_sparse_basis(read_dense(args.A), args.d, settings.tolerances)
    _emit(dumps_dense(basis), args.out)
    return EXIT_OK


def cmd_enumerate_binary(args: argparse.Namespace) -> int:
    B = read_sparse(args.B)
    members = enumerate_binary_nullspace(B, settings.tolerances)
    logger.info(f"Found {len(members)} binary messages")
    _emit(dumps_dense(members.reshape(-1, B.n)), args.out)
    return EXIT_OK


def cmd_serve(args: argparse.Namespace) -> int:
    from app.main import mcp_server

    transport = args.transport or settings.TRANSPORT
    logger.info(f"Starting {settings.PROJECT_NAME} v{settings.PROJECT_VERSION} over {transport}")
    if transport == "stdio":
        mcp_server.run(transport="stdio")
    else:
        mcp_server.run(transport=transport, host=settings.APP_HOST, port=settings.APP_PORT)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="submem",
        description="Associative memory over sparse-constraint subspaces: learn B, correct errors, run experiments.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("--seed", dest="global_seed", type=int, default=None, help="Master seed (default 0)")
    parser.add_argument("--rank-tol", type=float, default=None)
    parser.add_argument("--zero-tol", type=float, default=None)
    parser.add_argument("--ratio-tol", type=float, default=None)
    parser.add_argument("--sparsity-tol", type=float, default=None)
    parser.add_argument("--threads", dest="global_threads", type=int, default=None, help="Worker threads")
    parser.add_argument("--out", type=Path, default=None, help="Output file (stdout or a default name if omitted)")
    parser.add_argument("--debug", action="store_true", help="Log at DEBUG level")
    commands = parser.add_subparsers(dest="command", required=True)

    def law(text: str) -> WeightLaw:
        try:
            return WeightLaw.parse(text)
        except ValueError as e:
            raise argparse.ArgumentTypeError(str(e)) from e

    gen = commands.add_parser("gen", help="Generate a seeded sparse constraint matrix")
    gen.add_argument("--m", type=int, required=True)
    gen.add_argument("--n", type=int, required=True)
    gen.add_argument("--d", type=int, required=True)
    gen.add_argument("--law", type=law, default=WeightLaw.uniform_integers(3))
    gen.add_argument("--samples", type=int, default=0, help="Also draw this many dataset samples")
    gen.add_argument("--coeff-law", type=law, default=None)
    gen.add_argument("--samples-out", type=Path, default=Path("samples.dense"))
    gen.set_defaults(handler=cmd_gen)

    learn = commands.add_parser("learn", help="Recover B from dataset samples")
    learn.add_argument("--m", type=int, required=True, help="Number of constraints")
    learn.add_argument("--samples", type=Path, default=None, help="Dense sample file")
    learn.add_argument("--reference", type=Path, default=None, help="True B (sparse) to match against")
    learn.add_argument("--n", type=int, default=None)
    learn.add_argument("--d", type=int, default=None)
    learn.add_argument("--law", type=law, default=WeightLaw.uniform_integers(3))
    learn.add_argument("--pair-budget", type=int, default=None)
    learn.set_defaults(handler=cmd_learn, default_out=Path("b_hat.sparse"))

    dec = commands.add_parser("decode", help="Correct a corrupted message")
    dec.add_argument("--B", type=Path, required=True)
    dec.add_argument("--y", type=Path, required=True)
    dec.add_argument("--epsilon", type=float, default=None)
    dec.add_argument("--max-iters", type=int, default=None)
    dec.set_defaults(handler=cmd_decode, default_out=Path("x_hat.vec"))

    expand = commands.add_parser("expand-check", help="Verify the (t, l) expansion property")
    expand.add_argument("--B", type=Path, required=True)
    expand.add_argument("--t", type=int, required=True)
    expand.add_argument("--l", type=float, required=True)
    expand.set_defaults(handler=cmd_expand_check)

    sim = commands.add_parser("simulate", help="Failure fraction against error count")
    sim.add_argument("--config", type=Path, default=None, help="JSON ExperimentConfig; flags override it")
    sim.add_argument("--m", type=int, default=None)
    sim.add_argument("--n", type=int, default=None)
    sim.add_argument("--d", type=int, default=None)
    sim.add_argument("--law", type=str, default=None)
    sim.add_argument("--coeff-law", type=str, default=None)
    sim.add_argument("--magnitude", type=int, default=None)
    sim.add_argument("--E", type=parse_counts, default=None, help='Error counts, e.g. "0-30" or "1,2,4"')
    sim.add_argument("--trials", type=int, default=None)
    sim.add_argument("--epsilon", type=float, default=None)
    sim.add_argument("--pair-budget", type=int, default=None)
    sim.add_argument("--max-iters", type=int, default=None)
    sim.add_argument("--true-B", action="store_true", help="Decode with the generated B")
    sim.add_argument("--no-timing", action="store_true", help="Record mean_decode_ms as 0")
    sim.set_defaults(handler=cmd_simulate)

    sweep = commands.add_parser("sweep-learning", help="Exact-learning frequency at n = c m ln m")
    sweep.add_argument("--m-list", type=_list_of(int), required=True)
    sweep.add_argument("--c-list", type=_list_of(float), required=True)
    sweep.add_argument("--d", type=int, default=3)
    sweep.add_argument("--law", type=law, default=WeightLaw.uniform_integers(3))
    sweep.add_argument("--trials", type=int, default=20)
    sweep.add_argument("--pair-budget", type=int, default=None)
    sweep.set_defaults(handler=cmd_sweep_learning)

    search = commands.add_parser("sparse-search", help="Exhaustive sparse basis of a row space")
    search.add_argument("--A", type=Path, required=True)
    search.add_argument("--d", type=int, required=True)
    search.set_defaults(handler=cmd_sparse_search)

    binary = commands.add_parser("enumerate-binary", help="All +-1 vectors in null(B)")
    binary.add_argument("--B", type=Path, required=True)
    binary.set_defaults(handler=cmd_enumerate_binary)

    serve = commands.add_parser("serve", help="Run the MCP tool server")
    serve.add_argument("--transport", choices=["stdio", "http", "sse", "streamable-http"], default=None)
    serve.set_defaults(handler=cmd_serve)

    return parser


def _apply_overrides(args: argparse.Namespace) -> None:
    for flag, name in (
        ("rank_tol", "RANK_TOL"),
        ("zero_tol", "ZERO_TOL"),
        ("ratio_tol", "RATIO_TOL"),
        ("sparsity_tol", "SPARSITY_TOL"),
        ("global_threads", "THREADS"),
    ):
        value = getattr(args, flag)
        if value is not None:
            setattr(settings, name, value)
    args.seed = 0 if args.global_seed is None else args.global_seed
    if args.out is None:
        args.out = getattr(args, "default_out", None)


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    log.configure(args.debug or None)
    log.new_run_id(args.command)

    try:
        _apply_overrides(args)
        logger.debug(f"Starting {args.command}")
        return args.handler(args)
    except SubmemError as e:
        logger.error(f"{args.command} failed: {e}")
        return EXIT_ERROR
    except ValidationError as e:
        logger.error(f"{args.command}: invalid configuration: {e}")
        return EXIT_ERROR
    except ValueError as e:
        logger.error(f"{args.command}: invalid input: {e}")
        return EXIT_ERROR
