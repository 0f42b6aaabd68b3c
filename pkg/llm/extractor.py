import re
from typing import List, Optional

from config import Config
from template.core import WILDCARD

DEFAULT_LIST_MARKER = r"^\s*(?:[-*]|\d+\.)\s+"
_QUOTES = "\"'`"


def _strip_quotes(text: str) -> str:
    while len(text) >= 2 and text[0] in _QUOTES and text[-1] == text[0]:
        text = text[1:-1].strip()
    return text


def extract_candidates(response: str, list_marker: Optional[str] = None) -> List[str]:
    """Pick template definitions out of a free-form answer.

    A line qualifies when it carries <*> or sits under a list marker
    ("-", "*", "N."). Markers, surrounding quotes/backticks and whitespace
    are stripped; prose lines without <*> are dropped. Never raises.
    """
    marker = re.compile(list_marker or Config.LIST_MARKER_PATTERN or DEFAULT_LIST_MARKER)
    candidates: List[str] = []
    seen = set()

    for line in (response or "").splitlines():
        listed = marker.match(line)
        text = line[listed.end():] if listed else line
        text = _strip_quotes(text.strip())
        if not text or text.startswith("```"):
            continue
        if WILDCARD not in text and not listed:
            continue
        if text not in seen:
            seen.add(text)
            candidates.append(text)

    return candidates
