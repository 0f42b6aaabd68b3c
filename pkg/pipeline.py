import os
import re
import json
import difflib
import logging
import concurrent.futures
from dataclasses import asdict, dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import pandas as pd

from config import Config
from errors import BackendUnreachable, NoMessages, SnapshotMismatch
from evaluation.metrics import P1, P1_P2, STRICT, EvalMode
from evaluation.report import EvalReport, TemplateEvaluator, summary_table, write_csv
from ingest.ground_truth import GroundTruth, load_ground_truth, load_templates
from ingest.syslog import Partition, partition_by_app, read_log
from llm.backends import BackendConfig, record_exchanges
from mining.engine import MiningConfig, TemplateMiner
from mining.result import MiningResult, comparable_view, load_result_dict
from prompts import Prompts
from utils.hashing import sha256_file

logger = logging.getLogger("TemplateMiner")


@dataclass(frozen=True)
class RunConfig:
    command: str
    log_path: Optional[str] = None
    truth_path: Optional[str] = None
    detected_path: Optional[str] = None
    out_dir: str = field(default_factory=lambda: Config.OUTPUT_DIR)
    batch_size: int = field(default_factory=lambda: Config.BATCH_SIZE)
    backend: str = "http"
    endpoint: Optional[str] = None
    model: Optional[str] = None
    timeout: Optional[float] = None
    prompt_file: Optional[str] = None
    p1: bool = False
    p2: bool = False
    all_modes: bool = False
    record_path: Optional[str] = None
    replay_path: Optional[str] = None
    jobs: int = field(default_factory=lambda: Config.MAX_WORKERS)
    headers: bool = True
    strip_prefix: Optional[str] = None
    dataset: str = ""
    sweep_sizes: Tuple[int, ...] = Config.SWEEP_BATCH_SIZES

    def __post_init__(self):
        if self.batch_size < 1:
            raise ValueError(f"batch size must be at least 1, got {self.batch_size}")
        if self.jobs < 1:
            raise ValueError(f"--jobs must be at least 1, got {self.jobs}")

    @property
    def mode(self) -> EvalMode:
        return EvalMode.from_flags(p1=self.p1, p2=self.p2)


def _safe_name(app: str) -> str:
    return re.sub(r"[^A-Za-z0-9._-]", "_", app) or "_"


def _write_text(path: str, text: str) -> None:
    with open(path, "w", encoding="utf-8") as handle:
        handle.write(text)


def write_manifest(run: RunConfig, out_dir: str) -> None:
    """Config echo plus content hashes of every input, enough to rerun with a scripted backend."""
    inputs = {}
    for name in ("log_path", "truth_path", "detected_path", "prompt_file", "replay_path"):
        path = getattr(run, name)
        if path and os.path.exists(path):
            inputs[path] = sha256_file(path)
    manifest = {"config": asdict(run), "inputs": inputs}
    _write_text(os.path.join(out_dir, "manifest.json"), json.dumps(manifest, ensure_ascii=False, indent=2) + "\n")


class MiningPipeline:
    """
    Log file -> partitions per application -> template mining -> artifacts
    """

    def __init__(self, run: RunConfig):
        self.run = run
        self.static_part = Prompts.load_static_part(run.prompt_file or Config.PROMPT_FILE)
        self.truth: Optional[GroundTruth] = load_ground_truth(run.truth_path) if run.truth_path else None

    def load_partitions(self) -> List[Partition]:
        messages = read_log(self.run.log_path, headers=self.run.headers, strip_prefix=self.run.strip_prefix)
        if not messages:
            raise NoMessages(f"no messages in {self.run.log_path}")
        partitions = sorted(partition_by_app(messages), key=lambda p: p.app)
        logger.info(f"{len(messages)} messages in {len(partitions)} partitions: "
                    + ", ".join(f"{p.app}({len(p)})" for p in partitions))
        return partitions

    def backend_config(self, kind: Optional[str] = None) -> BackendConfig:
        kind = kind or self.run.backend
        return BackendConfig.from_config(
            kind,
            endpoint_url=self.run.endpoint,
            model_name=self.run.model,
            timeout=self.run.timeout,
            script_path=self.run.replay_path if kind == "scripted" else None,
            oracle_truth=self.truth.templates if kind == "oracle" and self.truth else None,
        )

    def mining_config(self, batch_size: Optional[int] = None, kind: Optional[str] = None) -> MiningConfig:
        return MiningConfig(
            backend=self.backend_config(kind),
            batch_size=batch_size or self.run.batch_size,
            static_part=self.static_part,
        )

    def mine_partitions(self, partitions: Sequence[Partition], cfg: MiningConfig) -> Tuple[Dict[str, MiningResult], List[str]]:
        """Mine every partition, in parallel when jobs > 1. Returns results by app and failed apps."""
        results: Dict[str, MiningResult] = {}
        failed: List[str] = []

        def mine_one(partition: Partition) -> MiningResult:
            return TemplateMiner(cfg, app=partition.app).mine(partition)

        def collect(partition: Partition, run_it) -> None:
            try:
                results[partition.app] = run_it()
            except BackendUnreachable as e:
                logger.error(f"[{partition.app}] Backend unreachable, mining aborted: {e}")
                failed.append(partition.app)
                if e.partial is not None:
                    results[partition.app] = e.partial

        if self.run.jobs <= 1 or len(partitions) <= 1:
            for partition in partitions:
                collect(partition, lambda p=partition: mine_one(p))
        else:
            with concurrent.futures.ThreadPoolExecutor(max_workers=self.run.jobs) as executor:
                future_to_partition = {executor.submit(mine_one, p): p for p in partitions}
                for future in concurrent.futures.as_completed(future_to_partition):
                    collect(future_to_partition[future], future.result)

        # aggregation is order-stable by partition name
        return dict(sorted(results.items())), sorted(failed)

    def run_mine(self) -> Tuple[Dict[str, MiningResult], List[str]]:
        logger.info("=== Starting Mining ===")
        partitions = self.load_partitions()
        results, failed = self.mine_partitions(partitions, self.mining_config())
        self.save_results(results, partitions)
        logger.info("=== Mining Finished ===")
        return results, failed

    def save_results(self, results: Dict[str, MiningResult], partitions: Sequence[Partition]) -> None:
        out = self.run.out_dir
        os.makedirs(os.path.join(out, "results"), exist_ok=True)
        by_app = {p.app: p for p in partitions}
        include_exchanges = bool(self.run.record_path)

        templates_txt, uncovered_txt, duplicates_txt = [], [], []
        written = set()
        stats = {}
        for app, result in results.items():
            _write_text(os.path.join(out, "results", f"{_safe_name(app)}.json"), result.to_json(include_exchanges))
            templates_txt.append(f"# {app}")
            for t in result.templates:
                # templates.txt must stay loadable as a ground truth file
                if t.source not in written:
                    written.add(t.source)
                    templates_txt.append(t.source)
            duplicates_txt.append(f"# {app}")
            duplicates_txt.extend(t.source for t in result.duplicates)
            messages = by_app[app].messages
            uncovered_txt.extend(f"{app}\t{messages[i].index}\t{messages[i].raw}" for i in result.uncovered)
            stats[app] = {
                "messages": result.message_count,
                "templates": len(result.templates),
                "uncovered": len(result.uncovered),
                "duplicates": len(result.duplicates),
                **result.stats.counters(),
                **result.stats.timing(),
            }

        _write_text(os.path.join(out, "templates.txt"), "\n".join(templates_txt) + "\n")
        _write_text(os.path.join(out, "uncovered.txt"), "\n".join(uncovered_txt) + ("\n" if uncovered_txt else ""))
        _write_text(os.path.join(out, "duplicates.txt"), "\n".join(duplicates_txt) + "\n")
        _write_text(os.path.join(out, "stats.json"), json.dumps(stats, ensure_ascii=False, indent=2) + "\n")
        write_manifest(self.run, out)

        if self.run.record_path:
            # one file for every partition; the "app" field routes replayed responses
            open(self.run.record_path, "w", encoding="utf-8").close()
            for app, result in results.items():
                record_exchanges(self.run.record_path, result.exchanges, app=app, append=True)
            logger.info(f"Exchanges recorded to {self.run.record_path}")

        table = pd.DataFrame.from_dict(stats, orient="index")
        if not table.empty:
            columns = ["messages", "templates", "uncovered", "duplicates", "queries", "candidates_invalid", "elapsed_ms"]
            logger.info("Per-partition summary:\n" + table[columns].to_string())
        logger.info(f"Results saved to {out}")

    def run_replay(self) -> None:
        """Re-mine with recorded responses and compare against the stored per-partition results."""
        logger.info("=== Starting Replay ===")
        if not self.run.replay_path or not os.path.exists(self.run.replay_path):
            raise FileNotFoundError(f"recorded exchange file not found: {self.run.replay_path}")
        partitions = self.load_partitions()
        results, _ = self.mine_partitions(partitions, self.mining_config(kind="scripted"))

        diffs = []
        for app, result in results.items():
            snapshot_path = os.path.join(self.run.out_dir, "results", f"{_safe_name(app)}.json")
            stored = load_result_dict(snapshot_path)
            expected = json.dumps(comparable_view(stored), ensure_ascii=False, indent=2) if stored else ""
            actual = json.dumps(comparable_view(result.to_dict()), ensure_ascii=False, indent=2)
            if expected != actual:
                diffs.extend(difflib.unified_diff(
                    expected.splitlines(), actual.splitlines(),
                    fromfile=snapshot_path, tofile=f"replay:{app}", lineterm="",
                ))
        os.makedirs(self.run.out_dir, exist_ok=True)
        write_manifest(self.run, self.run.out_dir)
        if diffs:
            raise SnapshotMismatch("\n".join(diffs))
        logger.info(f"Replay identical for {len(results)} partition(s)")

    def run_sweep(self) -> pd.DataFrame:
        """Mine the same log once per batch size and tabulate cost and outcome."""
        logger.info("=== Starting Batch Size Sweep ===")
        partitions = self.load_partitions()
        log = [message for partition in partitions for message in partition.messages]
        evaluator = TemplateEvaluator(self.truth, log) if self.truth else None
        rows = []

        for k in self.run.sweep_sizes:
            results, failed = self.mine_partitions(partitions, self.mining_config(batch_size=k))
            detected = [t for result in results.values() for t in result.templates]
            row = {
                "k": k,
                "queries": sum(r.stats.queries for r in results.values()),
                "invalid_candidates": sum(r.stats.candidates_invalid for r in results.values()),
                "templates": len(detected),
                "uncovered": sum(len(r.uncovered) for r in results.values()),
                "query_time_s": round(sum(sum(r.stats.exchange_elapsed_ms) for r in results.values()) / 1000, 3),
                "elapsed_s": round(sum(r.stats.elapsed_ms for r in results.values()) / 1000, 3),
                "failed": ",".join(failed),
            }
            if evaluator:
                row["f1_strict"] = round(evaluator.evaluate(detected, STRICT).f1, 3)
                row["f1_p1"] = round(evaluator.evaluate(detected, P1).f1, 3)
            rows.append(row)
            logger.info(f"k={k}: {row['queries']} queries, {row['templates']} templates")

        table = pd.DataFrame(rows)
        os.makedirs(self.run.out_dir, exist_ok=True)
        table.to_csv(os.path.join(self.run.out_dir, "sweep.csv"), index=False, encoding="utf-8")
        write_manifest(self.run, self.run.out_dir)
        return table


class EvaluationPipeline:
    """
    Detected templates + ground truth + log -> verdicts, scores and error classes
    """

    def __init__(self, run: RunConfig):
        self.run = run
        self.gt = load_ground_truth(run.truth_path)
        self.detected = load_templates(run.detected_path, unique=False)
        log = read_log(run.log_path, headers=run.headers, strip_prefix=run.strip_prefix)
        if not log:
            raise NoMessages(f"no messages in {run.log_path}")
        dataset = run.dataset or os.path.splitext(os.path.basename(run.log_path))[0]
        self.evaluator = TemplateEvaluator(self.gt, log, dataset=dataset)

    def modes(self) -> List[EvalMode]:
        if self.run.all_modes:
            return [STRICT, P1, P1_P2]
        return [self.run.mode]

    def run_eval(self) -> List[EvalReport]:
        logger.info("=== Starting Evaluation ===")
        reports = [self.evaluator.evaluate(self.detected, mode) for mode in self.modes()]
        out = self.run.out_dir
        os.makedirs(out, exist_ok=True)
        payload = reports[0].to_dict() if len(reports) == 1 else [report.to_dict() for report in reports]
        _write_text(os.path.join(out, "eval_report.json"), json.dumps(payload, ensure_ascii=False, indent=2) + "\n")
        write_csv(reports, os.path.join(out, "eval_summary.csv"), append=True)
        write_manifest(self.run, out)
        return reports

    def run_classify(self) -> pd.DataFrame:
        logger.info("=== Classifying Incorrect Templates ===")
        report = self.evaluator.evaluate(self.detected, self.run.mode)
        incorrect = [verdict for verdict in report.verdicts if not verdict.is_correct]
        out = self.run.out_dir
        os.makedirs(out, exist_ok=True)
        payload = {
            "dataset": report.dataset,
            "mode": report.mode,
            "counts": {"OG": report.og_count, "UG": report.ug_count, "MX": report.mx_count},
            "templates": [verdict.to_dict() for verdict in incorrect],
        }
        _write_text(os.path.join(out, "classification.json"), json.dumps(payload, ensure_ascii=False, indent=2) + "\n")
        write_manifest(self.run, out)
        return pd.DataFrame(
            [{"class": v.error_class.value, "template": v.template.source, "matched": v.matched_messages} for v in incorrect],
            columns=["class", "template", "matched"],
        )


def print_summary(reports: Sequence[EvalReport]) -> None:
    print(summary_table(reports).to_string(index=False))
