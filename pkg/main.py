import sys
import time
import logging
import argparse
from typing import List, Optional

from config import Config
from errors import BackendError, NoMessages, SnapshotMismatch, TemplateMinerError
from llm.backends import BACKEND_KINDS
from pipeline import EvaluationPipeline, MiningPipeline, RunConfig, print_summary
from utils.logger import setup_logger

logger = logging.getLogger("TemplateMiner")

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_BACKEND = 2
EXIT_MISMATCH = 3


def _positive_int(value: str) -> int:
    number = int(value)
    if number < 1:
        raise argparse.ArgumentTypeError(f"must be at least 1, got {number}")
    return number


def _batch_sizes(value: str):
    try:
        return tuple(_positive_int(part) for part in value.split(",") if part.strip())
    except ValueError as e:
        raise argparse.ArgumentTypeError(f"expected comma separated batch sizes, got {value!r}") from e


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="llmtd", description="Detect log message templates with an LLM and evaluate them.")
    parser.add_argument("--log-level", default=Config.LOG_LEVEL)
    commands = parser.add_subparsers(dest="command", required=True)

    def ingest_flags(sub):
        sub.add_argument("--log", required=True, help="syslog-style log file")
        sub.add_argument("--no-header", dest="headers", action="store_false",
                         help="lines start at the syslog tag, no header to strip")
        sub.add_argument("--strip-prefix", help="regex removed from the start of every line")
        sub.add_argument("--out", default=Config.OUTPUT_DIR, help="output directory")

    def backend_flags(sub, default="http"):
        sub.add_argument("--backend", choices=BACKEND_KINDS, default=default)
        sub.add_argument("--endpoint", default=None, help=f"completion endpoint (default {Config.ENDPOINT})")
        sub.add_argument("--model", default=None, help=f"model name (default {Config.MODEL})")
        sub.add_argument("--timeout", type=float, default=None, help="seconds per query")
        sub.add_argument("--prompt-file", default=None, help="replace the static prompt part")
        sub.add_argument("-k", "--batch-size", type=_positive_int, default=Config.BATCH_SIZE)
        sub.add_argument("--jobs", type=_positive_int, default=Config.MAX_WORKERS,
                         help="partitions mined in parallel")

    def eval_flags(sub):
        sub.add_argument("--truth", required=True, help="ground truth templates, one per line")
        sub.add_argument("--detected", required=True, help="detected templates, one per line")
        sub.add_argument("--p1", action="store_true", help="accept constants for invariant wildcards")
        sub.add_argument("--p2", action="store_true", help="accept <*> for words containing <*>")
        sub.add_argument("--dataset", default="", help="name used in reports")

    mine = commands.add_parser("mine", help="mine templates from a log")
    ingest_flags(mine)
    backend_flags(mine)
    mine.add_argument("--truth", help="ground truth for the oracle backend")
    mine.add_argument("--record", help="write every exchange to this JSONL file")

    replay = commands.add_parser("replay", help="re-mine with recorded responses and compare results")
    ingest_flags(replay)
    backend_flags(replay, default="scripted")
    replay.add_argument("--replay", required=True, help="JSONL file written by mine --record")

    evaluate = commands.add_parser("eval", help="score detected templates against ground truth")
    ingest_flags(evaluate)
    eval_flags(evaluate)
    evaluate.add_argument("--all-modes", action="store_true", help="report strict, P1 and P1+P2 together")

    classify = commands.add_parser("classify", help="classify incorrect templates as OG, UG or MX")
    ingest_flags(classify)
    eval_flags(classify)

    sweep = commands.add_parser("sweep", help="mine once per batch size and tabulate the outcome")
    ingest_flags(sweep)
    backend_flags(sweep)
    sweep.add_argument("--truth", help="ground truth; adds F1 columns and feeds the oracle backend")
    sweep.add_argument("--sizes", type=_batch_sizes, default=Config.SWEEP_BATCH_SIZES,
                       help="comma separated batch sizes")
    return parser


def run_config(args: argparse.Namespace) -> RunConfig:
    return RunConfig(
        command=args.command,
        log_path=args.log,
        truth_path=getattr(args, "truth", None),
        detected_path=getattr(args, "detected", None),
        out_dir=args.out,
        batch_size=getattr(args, "batch_size", Config.BATCH_SIZE),
        backend=getattr(args, "backend", "http"),
        endpoint=getattr(args, "endpoint", None),
        model=getattr(args, "model", None),
        timeout=getattr(args, "timeout", None),
        prompt_file=getattr(args, "prompt_file", None),
        p1=getattr(args, "p1", False),
        p2=getattr(args, "p2", False),
        all_modes=getattr(args, "all_modes", False),
        record_path=getattr(args, "record", None),
        replay_path=getattr(args, "replay", None),
        jobs=getattr(args, "jobs", Config.MAX_WORKERS),
        headers=args.headers,
        strip_prefix=args.strip_prefix,
        dataset=getattr(args, "dataset", ""),
        sweep_sizes=getattr(args, "sizes", Config.SWEEP_BATCH_SIZES),
    )


def cmd_mine(run: RunConfig) -> int:
    if run.backend == "oracle" and not run.truth_path:
        raise ValueError("the oracle backend needs --truth")
    results, failed = MiningPipeline(run).run_mine()
    if failed:
        logger.error(f"Backend failed for: {', '.join(failed)}; partial results written")
        return EXIT_BACKEND
    print(f"{sum(len(r.templates) for r in results.values())} templates from {len(results)} partition(s) "
          f"written to {run.out_dir}")
    return EXIT_OK


def cmd_replay(run: RunConfig) -> int:
    MiningPipeline(run).run_replay()
    print("replay identical")
    return EXIT_OK


def cmd_eval(run: RunConfig) -> int:
    reports = EvaluationPipeline(run).run_eval()
    print_summary(reports)
    return EXIT_OK


def cmd_classify(run: RunConfig) -> int:
    table = EvaluationPipeline(run).run_classify()
    if table.empty:
        print("no incorrect templates")
    else:
        print(table.to_string(index=False))
    return EXIT_OK


def cmd_sweep(run: RunConfig) -> int:
    table = MiningPipeline(run).run_sweep()
    print(table.to_string(index=False))
    return EXIT_OK


COMMANDS = {
    "mine": cmd_mine,
    "replay": cmd_replay,
    "eval": cmd_eval,
    "classify": cmd_classify,
    "sweep": cmd_sweep,
}


def main(argv: Optional[List[str]] = None) -> int:
    start_time = time.time()

    # 1. Setup Logger
    setup_logger(Config.LOG_LEVEL)

    # 2. Validate Config (before its values become flag defaults)
    Config.validate()

    # 3. Parse Arguments
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_OK if e.code == 0 else EXIT_USAGE
    setup_logger(args.log_level)

    # 4. Run Command
    try:
        code = COMMANDS[args.command](run_config(args))
    except SnapshotMismatch as e:
        print(e.diff, file=sys.stderr)
        logger.error(str(e))
        return EXIT_MISMATCH
    except NoMessages as e:
        logger.error(str(e))
        return EXIT_USAGE
    except BackendError as e:
        logger.error(f"Backend failure: {e}")
        return EXIT_BACKEND
    except (TemplateMinerError, ValueError, OSError) as e:
        logger.error(f"{type(e).__name__}: {e}")
        return EXIT_USAGE

    elapsed_time = time.time() - start_time
    logger.info(f"Total run time: {elapsed_time:.2f} s")
    return code


if __name__ == "__main__":
    sys.exit(main())
