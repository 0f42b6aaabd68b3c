import time
import logging
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Set, Tuple

from config import Config
from errors import BackendError, BackendUnreachable, EmptyTemplate, TemplateMinerError
from ingest.syslog import LogMessage, Partition
from llm.backends import BackendConfig, CompletionBackend, create_backend
from llm.extractor import extract_candidates
from llm.prompt import build_prompt
from mining.result import MiningResult, MiningStats
from prompts import Prompts
from template.core import Template, matches, parse_template

logger = logging.getLogger("TemplateMiner")

PROGRESS_EVERY = 10  # batches


@dataclass(frozen=True)
class MiningConfig:
    backend: BackendConfig
    batch_size: int = 10
    static_part: str = Prompts.TEMPLATE_DETECTION
    overgeneral_ratio: float = field(default_factory=lambda: Config.OVERGENERAL_RATIO)
    list_marker: Optional[str] = None

    def __post_init__(self):
        if self.batch_size < 1:
            raise ValueError(f"batch size must be at least 1, got {self.batch_size}")


def validate_candidates(
    batch: Sequence[LogMessage],
    candidates: Sequence[str],
    stats: Optional[MiningStats] = None,
) -> List[Template]:
    """Keep candidates that parse and match a batch message; the first match becomes the representative."""
    validated: List[Template] = []
    for candidate in candidates:
        try:
            template = parse_template(candidate)
        except EmptyTemplate:
            if stats:
                stats.candidates_invalid += 1
            continue

        representative = next((message for message in batch if matches(template, message.text)), None)
        if representative is None:
            logger.debug(f"Discarding candidate without a match in its batch: {candidate}")
            if stats:
                stats.candidates_invalid += 1
            continue
        validated.append(template.with_representative(representative))
    return validated


def merge(
    templates: Sequence[Template],
    candidates: Sequence[Template],
    stats: Optional[MiningStats] = None,
) -> List[Template]:
    """Add new candidates, then drop every template whose representative a more general one covers."""
    merged = list(templates)
    known = {t.source for t in merged}
    for candidate in candidates:
        if candidate.source in known:
            if stats:
                stats.candidates_already_present += 1
            continue
        known.add(candidate.source)
        merged.append(candidate)

    dropped: Set[int] = set()
    for i, t1 in enumerate(merged):
        for j, t2 in enumerate(merged):
            if i == j:
                continue
            if matches(t2, t1.representative.text) and not matches(t1, t2.representative.text):
                dropped.add(i)
                break

    if stats:
        stats.templates_dropped_specific += len(dropped)
    for i in sorted(dropped):
        logger.debug(f"Dropping more specific template: {merged[i].source}")
    return [t for i, t in enumerate(merged) if i not in dropped]


def second_pass(templates: Sequence[Template], messages: Sequence[LogMessage]) -> Tuple[Set[int], List[Template]]:
    """Uncovered message positions and templates that never are the sole match (duplicates)."""
    uncovered: Set[int] = set()
    sole: Set[str] = set()
    for i, message in enumerate(messages):
        matching = [t for t in templates if matches(t, message.text)]
        if not matching:
            uncovered.add(i)
        elif len(matching) == 1:
            sole.add(matching[0].source)
    duplicates = [t for t in templates if t.source not in sole]
    return uncovered, duplicates


class TemplateMiner:
    """Mines one partition; owns its backend handle."""

    def __init__(self, cfg: MiningConfig, backend: Optional[CompletionBackend] = None, app: Optional[str] = None):
        self.cfg = cfg
        self.backend = backend or create_backend(cfg.backend, app=app)

    def mine(self, partition: Partition) -> MiningResult:
        messages = list(partition.messages)
        stats = MiningStats()
        exchanges = []
        templates: List[Template] = []
        batch: List[LogMessage] = []
        k = self.cfg.batch_size
        start = time.perf_counter()
        logger.info(f"[{partition.app}] Mining {len(messages)} messages (k={k}, backend={self.cfg.backend.kind})")

        def run_batch(seen: int) -> None:
            nonlocal templates
            try:
                templates = self._process_batch(templates, batch, messages[:seen], stats, exchanges)
            except BackendUnreachable as e:
                stats.elapsed_ms = (time.perf_counter() - start) * 1000
                e.partial = self._result(partition.app, messages, templates, stats, exchanges)
                raise
            if stats.queries % PROGRESS_EVERY == 0:
                logger.info(f"[{partition.app}] Progress: [{seen}/{len(messages)}] messages, "
                            f"{len(templates)} templates, {stats.queries} queries")

        for position, message in enumerate(messages):
            # messages an existing template covers are never sent
            if self._covered(templates, message):
                stats.messages_skipped += 1
                continue
            batch.append(message)
            if len(batch) < k:
                continue
            run_batch(position + 1)
            batch = []

        # trailing incomplete batch
        if batch:
            run_batch(len(messages))
            batch = []

        stats.elapsed_ms = (time.perf_counter() - start) * 1000
        result = self._result(partition.app, messages, templates, stats, exchanges)
        logger.info(f"[{partition.app}] Done: {len(result.templates)} templates, {len(result.uncovered)} uncovered, "
                    f"{len(result.duplicates)} duplicates, {stats.queries} queries")
        return result

    def _covered(self, templates: Sequence[Template], message: LogMessage) -> bool:
        return any(matches(t, message.text) for t in templates)

    def _process_batch(self, templates, batch, seen_messages, stats: MiningStats, exchanges) -> List[Template]:
        prompt = build_prompt([message.text for message in batch], self.cfg.static_part)
        stats.queries += 1
        try:
            exchange = self.backend.query(prompt)
        except BackendUnreachable:
            if stats.queries == 1 and self.cfg.backend.kind == "http":
                raise
            stats.backend_errors += 1
            logger.warning(f"Backend unreachable for batch #{stats.queries}; batch skipped")
            return templates
        except BackendError as e:
            stats.backend_errors += 1
            logger.warning(f"Backend error on batch #{stats.queries}: {e}; batch skipped")
            return templates

        exchanges.append(exchange)
        stats.exchange_elapsed_ms.append(exchange.elapsed)

        candidates = extract_candidates(exchange.response, self.cfg.list_marker)
        stats.candidates_seen += len(candidates)
        validated = validate_candidates(batch, candidates, stats)
        before = {t.source for t in templates}
        merged = merge(templates, validated, stats)
        self._warn_overgeneral([t for t in merged if t.source not in before], seen_messages, stats)
        return merged

    def _warn_overgeneral(self, new_templates, seen_messages, stats: MiningStats) -> None:
        if not seen_messages:
            return
        for t in new_templates:
            covered = sum(1 for message in seen_messages if matches(t, message.text))
            ratio = covered / len(seen_messages)
            if ratio > self.cfg.overgeneral_ratio:
                warning = (f"template matches {covered}/{len(seen_messages)} messages seen so far "
                           f"({ratio:.0%}), possibly over-general: {t.source}")
                stats.warnings.append(warning)
                logger.warning(warning)

    @staticmethod
    def _result(app, messages, templates, stats, exchanges) -> MiningResult:
        uncovered, duplicates = second_pass(templates, messages)
        return MiningResult(
            app=app,
            templates=list(templates),
            uncovered=tuple(sorted(uncovered)),
            duplicates=duplicates,
            exchanges=list(exchanges),
            stats=stats,
            message_count=len(messages),
        )


def mine(partition: Partition, cfg: MiningConfig, backend: Optional[CompletionBackend] = None) -> MiningResult:
    if not partition.messages:
        raise TemplateMinerError(f"partition {partition.app!r} is empty")
    return TemplateMiner(cfg, backend=backend, app=partition.app).mine(partition)
