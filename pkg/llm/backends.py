import json
import time
import logging
from dataclasses import dataclass
from typing import Dict, Iterable, List, Optional, Sequence

import requests

from config import Config
from errors import BackendError, BackendTimeout, BackendUnreachable, HttpStatusError, MalformedResponse, ScriptExhausted
from llm.prompt import Prompt
from template.core import Template, matches

logger = logging.getLogger("TemplateMiner")

BACKEND_KINDS = ("http", "scripted", "oracle")


@dataclass(frozen=True)
class BackendConfig:
    kind: str = "http"
    endpoint_url: Optional[str] = None
    model_name: Optional[str] = None
    timeout: float = 300.0  # seconds
    api_path: str = "/api/generate"
    script_path: Optional[str] = None
    oracle_truth: Optional[Sequence[Template]] = None

    def __post_init__(self):
        if self.kind not in BACKEND_KINDS:
            raise ValueError(f"unknown backend kind {self.kind!r}, expected one of {BACKEND_KINDS}")
        if self.timeout <= 0:
            raise ValueError("backend timeout must be positive")
        required = {
            "http": ("endpoint_url", "model_name"),
            "scripted": ("script_path",),
            "oracle": ("oracle_truth",),
        }[self.kind]
        missing = [name for name in required if getattr(self, name) is None]
        if missing:
            raise ValueError(f"{self.kind} backend needs {', '.join(missing)}")

    @classmethod
    def from_config(cls, kind: str = "http", **overrides) -> "BackendConfig":
        values = dict(
            kind=kind,
            endpoint_url=Config.ENDPOINT if kind == "http" else None,
            model_name=Config.MODEL if kind == "http" else None,
            timeout=Config.TIMEOUT,
            api_path=Config.API_PATH,
        )
        values.update({key: value for key, value in overrides.items() if value is not None})
        return cls(**values)


@dataclass(frozen=True)
class BackendExchange:
    prompt: Prompt
    response: str
    backend_id: str
    elapsed: float  # milliseconds

    def to_record(self, app: Optional[str] = None, with_timing: bool = True) -> Dict:
        record = {"prompt_hash": self.prompt.digest, "response": self.response, "backend_id": self.backend_id}
        if app is not None:
            record["app"] = app
        if with_timing:
            record["elapsed_ms"] = round(self.elapsed, 3)
        return record


class CompletionBackend:
    """One backend handle; serves at most one in-flight query."""

    backend_id = "backend"

    def complete(self, prompt: Prompt) -> str:
        raise NotImplementedError

    def query(self, prompt: Prompt) -> BackendExchange:
        start = time.perf_counter()
        response = self.complete(prompt)
        elapsed = (time.perf_counter() - start) * 1000
        return BackendExchange(prompt=prompt, response=response, backend_id=self.backend_id, elapsed=max(elapsed, 0.0))


class HttpBackend(CompletionBackend):
    """JSON completion endpoint: {"model", "prompt", "stream": false} -> {"response"}."""

    def __init__(self, endpoint_url: str, model_name: str, timeout: float, api_path: str = "/api/generate"):
        base = endpoint_url.rstrip("/")
        path = "/" + api_path.strip("/") if api_path else ""
        self.url = base if not path or base.endswith(path) else base + path
        self.model = model_name
        self.timeout = timeout
        self.backend_id = f"http:{model_name}"

    def complete(self, prompt: Prompt) -> str:
        payload = {"model": self.model, "prompt": prompt.rendered, "stream": False}
        try:
            resp = requests.post(self.url, json=payload, timeout=self.timeout)
        except requests.Timeout as e:
            raise BackendTimeout(f"no answer from {self.url} within {self.timeout}s") from e
        except requests.ConnectionError as e:
            raise BackendUnreachable(f"cannot connect to {self.url}: {e}") from e
        except requests.RequestException as e:
            raise BackendError(f"request to {self.url} failed: {type(e).__name__}: {e}") from e

        if resp.status_code != 200:
            raise HttpStatusError(resp.status_code, resp.text)
        try:
            body = resp.json()
        except ValueError as e:
            raise MalformedResponse(f"backend reply is not JSON: {resp.text[:200]!r}") from e
        if not isinstance(body, dict) or not isinstance(body.get("response"), str):
            raise MalformedResponse("backend reply has no 'response' field")
        return body["response"]


class ScriptedBackend(CompletionBackend):
    """Replays recorded responses in order."""

    backend_id = "scripted"

    def __init__(self, records: Iterable[Dict], app: Optional[str] = None):
        records = list(records)
        if app is not None and any("app" in record for record in records):
            records = [record for record in records if record.get("app") == app]
        self.records = records
        self.position = 0

    @classmethod
    def from_file(cls, path: str, app: Optional[str] = None) -> "ScriptedBackend":
        return cls(load_script(path), app=app)

    def complete(self, prompt: Prompt) -> str:
        if self.position >= len(self.records):
            raise ScriptExhausted(f"script has only {len(self.records)} recorded responses")
        record = self.records[self.position]
        self.position += 1
        recorded_hash = record.get("prompt_hash")
        if recorded_hash and recorded_hash != prompt.digest:
            logger.warning(f"Replayed response #{self.position} was recorded for a different prompt")
        return record.get("response", "")


class OracleBackend(CompletionBackend):
    """Answers each batch with the truth templates that match at least one of its messages."""

    backend_id = "oracle"

    def __init__(self, truth: Sequence[Template]):
        self.truth = list(truth)

    def complete(self, prompt: Prompt) -> str:
        found = [t for t in self.truth if any(matches(t, text) for text in prompt.batch)]
        if not found:
            return "No templates were found for this log."
        lines = ["Templates:"] + [f"{number}. {t.source}" for number, t in enumerate(found, 1)]
        return "\n".join(lines)


def create_backend(cfg: BackendConfig, app: Optional[str] = None) -> CompletionBackend:
    """Fresh backend handle; each partition gets its own."""
    if cfg.kind == "http":
        return HttpBackend(cfg.endpoint_url, cfg.model_name, cfg.timeout, cfg.api_path)
    if cfg.kind == "scripted":
        return ScriptedBackend.from_file(cfg.script_path, app=app)
    return OracleBackend(cfg.oracle_truth)


def query(backend: CompletionBackend, prompt: Prompt) -> BackendExchange:
    return backend.query(prompt)


def load_script(path: str) -> List[Dict]:
    records = []
    with open(path, "r", encoding="utf-8") as handle:
        for number, line in enumerate(handle, 1):
            if not line.strip():
                continue
            record = json.loads(line)
            if not isinstance(record, dict) or "response" not in record:
                raise ValueError(f"{path}:{number}: exchange record needs a 'response' field")
            records.append(record)
    return records


def record_exchanges(path: str, exchanges: Iterable[BackendExchange], app: Optional[str] = None, append: bool = False):
    with open(path, "a" if append else "w", encoding="utf-8") as handle:
        for exchange in exchanges:
            handle.write(json.dumps(exchange.to_record(app=app), ensure_ascii=False) + "\n")
