from dataclasses import dataclass
from typing import Sequence, Tuple

from errors import EmptyBatch
from prompts import Prompts
from utils.hashing import sha256_text


@dataclass(frozen=True)
class Prompt:
    static_part: str
    batch: Tuple[str, ...]
    rendered: str

    @property
    def digest(self) -> str:
        return sha256_text(self.rendered)


def build_prompt(batch: Sequence[str], static_part: str = Prompts.TEMPLATE_DETECTION) -> Prompt:
    """Static part, a blank line, then the batch one message per line."""
    if not batch:
        raise EmptyBatch("cannot build a prompt for an empty batch")
    for text in batch:
        if "\n" in text or "\r" in text:
            raise ValueError(f"batch message contains a line terminator: {text[:80]!r}")
    rendered = static_part + Prompts.BATCH_SEPARATOR + "\n".join(batch) + "\n"
    return Prompt(static_part=static_part, batch=tuple(batch), rendered=rendered)
