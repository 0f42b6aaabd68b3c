import re
import logging
from dataclasses import dataclass
from typing import Dict, List, Optional, Tuple

from errors import ContainsWildcardMarker, EmptyLine
from template.core import WILDCARD

logger = logging.getLogger("TemplateMiner")

UNKNOWN_APP = "unknown"

# RFC 3164 header pieces, stripped in this order when present
_PRIORITY = re.compile(r"<\d{1,3}>")
_TIMESTAMP = re.compile(r"(?:Jan|Feb|Mar|Apr|May|Jun|Jul|Aug|Sep|Oct|Nov|Dec) [ \d]\d \d{2}:\d{2}:\d{2} +")
_HOSTNAME = re.compile(r"\S+ +")
# "name[pid]:" or "name:" followed by whitespace or end of line
_TAG = re.compile(r"([^\s\[\]:]+)(?:\[[^\]\s]*\])?:(?=\s|$)")


@dataclass(frozen=True)
class LogMessage:
    index: int
    app: str
    text: str
    raw: str


@dataclass(frozen=True)
class Partition:
    app: str
    messages: Tuple[LogMessage, ...]

    def __len__(self) -> int:
        return len(self.messages)


def _strip_prefix(line: str, strip_prefix: Optional["re.Pattern[str]"]) -> str:
    if strip_prefix is not None:
        found = strip_prefix.match(line)
        if found:
            return line[found.end():]
    return line


def _strip_header(rest: str) -> str:
    found = _PRIORITY.match(rest)
    if found:
        rest = rest[found.end():]
    found = _TIMESTAMP.match(rest)
    if found:
        rest = rest[found.end():]
        # a hostname only follows a timestamp
        found = _HOSTNAME.match(rest)
        if found and _TAG.match(rest) is None:
            rest = rest[found.end():]
    return rest


def parse_syslog_line(
    line: str,
    index: int = 0,
    headers: bool = True,
    strip_prefix: Optional["re.Pattern[str]"] = None,
) -> LogMessage:
    """Split one raw line into application name and message text.

    With headers=False the line is taken to start at the syslog tag already.
    """
    raw = line.rstrip("\r\n")
    if not raw.strip():
        raise EmptyLine(f"line {index} is empty")

    text = _strip_prefix(raw, strip_prefix)
    if headers:
        text = _strip_header(text)
    if not text.strip():
        raise EmptyLine(f"line {index} has a header but no message")
    if WILDCARD in text:
        raise ContainsWildcardMarker(f"line {index} contains the wildcard marker {WILDCARD}")

    tag = _TAG.match(text)
    app = tag.group(1) if tag else UNKNOWN_APP
    return LogMessage(index=index, app=app, text=text, raw=raw)


def read_log(
    path: str,
    headers: bool = True,
    strip_prefix: Optional[str] = None,
) -> List[LogMessage]:
    """Read an event log file, skipping blank lines and lines carrying <*>."""
    pattern = re.compile(strip_prefix) if strip_prefix else None
    messages: List[LogMessage] = []
    rejected = 0

    with open(path, "r", encoding="utf-8", newline="") as handle:
        for index, line in enumerate(handle):
            try:
                messages.append(parse_syslog_line(line, index, headers=headers, strip_prefix=pattern))
            except EmptyLine:
                continue
            except ContainsWildcardMarker as e:
                rejected += 1
                logger.warning(f"Skipping line: {e}")

    if rejected:
        logger.warning(f"{rejected} line(s) rejected because they contain {WILDCARD}")
    logger.info(f"Loaded {len(messages)} messages from {path}")
    return messages


def partition_by_app(log: List[LogMessage]) -> List[Partition]:
    """One partition per application, in order of first appearance."""
    groups: Dict[str, List[LogMessage]] = {}
    for message in log:
        groups.setdefault(message.app, []).append(message)
    return [Partition(app=app, messages=tuple(messages)) for app, messages in groups.items()]
