import json
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

from llm.backends import BackendExchange
from template.core import Template


@dataclass
class MiningStats:
    queries: int = 0
    candidates_seen: int = 0
    candidates_invalid: int = 0
    candidates_already_present: int = 0
    templates_dropped_specific: int = 0
    messages_skipped: int = 0
    backend_errors: int = 0
    warnings: List[str] = field(default_factory=list)
    # timing is kept out of the deterministic serialization
    elapsed_ms: float = 0.0
    exchange_elapsed_ms: List[float] = field(default_factory=list)

    def counters(self) -> Dict:
        return {
            "queries": self.queries,
            "candidates_seen": self.candidates_seen,
            "candidates_invalid": self.candidates_invalid,
            "candidates_already_present": self.candidates_already_present,
            "templates_dropped_specific": self.templates_dropped_specific,
            "messages_skipped": self.messages_skipped,
            "backend_errors": self.backend_errors,
            "warnings": list(self.warnings),
        }

    def timing(self) -> Dict:
        return {
            "elapsed_ms": round(self.elapsed_ms, 3),
            "query_time_ms": round(sum(self.exchange_elapsed_ms), 3),
            "exchange_elapsed_ms": [round(value, 3) for value in self.exchange_elapsed_ms],
        }


@dataclass
class MiningResult:
    """(T, U, V) for one partition plus the exchanges and counters that produced it."""

    app: str
    templates: List[Template]
    uncovered: Tuple[int, ...]
    duplicates: List[Template]
    exchanges: List[BackendExchange] = field(default_factory=list)
    stats: MiningStats = field(default_factory=MiningStats)
    message_count: int = 0

    def to_dict(self, include_exchanges: bool = False) -> Dict:
        data = {
            "app": self.app,
            "messages": self.message_count,
            "templates": [t.source for t in self.templates],
            "representatives": [getattr(t.representative, "text", None) for t in self.templates],
            "uncovered": list(self.uncovered),
            "duplicates": [t.source for t in self.duplicates],
            "stats": self.stats.counters(),
        }
        if include_exchanges:
            data["exchanges"] = [exchange.to_record(with_timing=False) for exchange in self.exchanges]
        return data

    def to_json(self, include_exchanges: bool = False) -> str:
        return json.dumps(self.to_dict(include_exchanges), ensure_ascii=False, indent=2) + "\n"


def comparable_view(data: Dict) -> Dict:
    """Drop the optional exchange log before comparing two serialized results."""
    return {key: value for key, value in data.items() if key != "exchanges"}


def load_result_dict(path: str) -> Optional[Dict]:
    try:
        with open(path, "r", encoding="utf-8") as handle:
            return json.load(handle)
    except FileNotFoundError:
        return None
