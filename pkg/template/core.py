import re
from dataclasses import dataclass, field, replace
from enum import Enum
from functools import cached_property
from typing import FrozenSet, Iterable, List, Optional, Sequence, Tuple

from errors import EmptyTemplate

WILDCARD = "<*>"
_WILDCARD_RUN = re.compile(r"(?:<\*>)+")


class TokenKind(Enum):
    LITERAL = "Literal"
    WILDCARD = "Wildcard"


@dataclass(frozen=True)
class Token:
    kind: TokenKind
    text: str = ""

    def __post_init__(self):
        if self.kind is TokenKind.LITERAL:
            if not self.text or WILDCARD in self.text:
                raise ValueError(f"invalid literal token text: {self.text!r}")
        elif self.text:
            raise ValueError("wildcard tokens carry no text")

    @property
    def is_wildcard(self) -> bool:
        return self.kind is TokenKind.WILDCARD

    @classmethod
    def literal(cls, text: str) -> "Token":
        return cls(TokenKind.LITERAL, text)

    @classmethod
    def wildcard(cls) -> "Token":
        return cls(TokenKind.WILDCARD)


@dataclass(frozen=True)
class Template:
    """A line pattern of literal blocks and <*> wildcards.

    Identity (equality and hashing) is the canonical source string; the
    representative message rides along but never takes part in comparisons.
    """

    tokens: Tuple[Token, ...]
    source: str
    representative: Optional[object] = field(default=None, compare=False, repr=False)

    @cached_property
    def regex(self) -> "re.Pattern[str]":
        return _compile(self.tokens)

    @property
    def wildcard_count(self) -> int:
        return sum(1 for token in self.tokens if token.is_wildcard)

    @property
    def literal_length(self) -> int:
        return sum(len(token.text) for token in self.tokens)

    def with_representative(self, message) -> "Template":
        return replace(self, representative=message)

    def __str__(self) -> str:
        return self.source


@dataclass(frozen=True)
class MatchSet:
    """Indices of the messages of one concrete log matched by a template."""

    indices: FrozenSet[int]

    def __len__(self) -> int:
        return len(self.indices)

    def __iter__(self):
        return iter(sorted(self.indices))

    def __contains__(self, index: int) -> bool:
        return index in self.indices


def _compile(tokens: Sequence[Token]) -> "re.Pattern[str]":
    # Wildcards are lazy; fullmatch makes the boolean result independent of that choice.
    parts = ["(?:.+?)" if token.is_wildcard else re.escape(token.text) for token in tokens]
    return re.compile("".join(parts), re.DOTALL)


def _normalize(tokens: Iterable[Token]) -> Tuple[Token, ...]:
    """Collapse adjacent wildcards and concatenate adjacent literals."""
    result: List[Token] = []
    for token in tokens:
        if result and result[-1].kind is token.kind:
            if token.is_wildcard:
                continue
            result[-1] = Token.literal(result[-1].text + token.text)
        else:
            result.append(token)
    return tuple(result)


def format_tokens(tokens: Iterable[Token]) -> str:
    return "".join(WILDCARD if token.is_wildcard else token.text for token in tokens)


def template_from_tokens(tokens: Iterable[Token]) -> Template:
    normalized = _normalize(tokens)
    if not normalized:
        raise EmptyTemplate("template has no tokens")
    return Template(tokens=normalized, source=format_tokens(normalized))


def parse_template(s: str) -> Template:
    """Parse the canonical text form; runs of <*> collapse to one wildcard."""
    text = s.rstrip("\r\n")
    if not text.strip():
        raise EmptyTemplate("empty template string")

    tokens: List[Token] = []
    position = 0
    for run in _WILDCARD_RUN.finditer(text):
        if run.start() > position:
            tokens.append(Token.literal(text[position:run.start()]))
        tokens.append(Token.wildcard())
        position = run.end()
    if position < len(text):
        tokens.append(Token.literal(text[position:]))

    return template_from_tokens(tokens)


def format_template(t: Template) -> str:
    return format_tokens(t.tokens)


def matches(t: Template, text: str) -> bool:
    """Full-line match; every wildcard binds one or more characters."""
    return t.regex.fullmatch(text) is not None


def match_set(t: Template, log: Sequence) -> MatchSet:
    """Indices of the messages in `log` (LogMessage or plain str) matched by t."""
    pattern = t.regex
    return MatchSet(frozenset(
        i for i, message in enumerate(log)
        if pattern.fullmatch(getattr(message, "text", message)) is not None
    ))
