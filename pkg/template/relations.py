"""Structural and language-level relations between templates.

Every template denotes a regular language: literal blocks interleaved with
"one or more arbitrary characters". Inclusion is decided exactly by a
product of the first template's automaton with the subset construction
of the second one.
"""
import re
from collections import deque
from functools import lru_cache
from typing import FrozenSet, List, Optional, Set, Tuple

from template.core import WILDCARD, Template

# Stands for every character that occurs in neither template's literals.
_OTHER = None


class _PatternAutomaton:
    """Character-level NFA of one template.

    State i < final consumes steps[i]; a step is a literal character or
    None for "any character". The state following an "any" step loops on
    any character, which gives wildcards their one-or-more semantics.
    """

    def __init__(self, template: Template):
        steps: List[Optional[str]] = []
        for token in template.tokens:
            if token.is_wildcard:
                steps.append(None)
            else:
                steps.extend(token.text)
        self.steps = steps
        self.final = len(steps)
        self.loops = {i + 1 for i, step in enumerate(steps) if step is None}
        self.alphabet = {step for step in steps if step is not None}

    def step(self, state: int, symbol: Optional[str]) -> Set[int]:
        targets = set()
        if state < self.final:
            expected = self.steps[state]
            if expected is None or expected == symbol:
                targets.add(state + 1)
        if state in self.loops:
            targets.add(state)
        return targets

    def step_all(self, states: FrozenSet[int], symbol: Optional[str]) -> FrozenSet[int]:
        result: Set[int] = set()
        for state in states:
            result |= self.step(state, symbol)
        return frozenset(result)


@lru_cache(maxsize=4096)
def _automaton(template: Template) -> _PatternAutomaton:
    return _PatternAutomaton(template)


@lru_cache(maxsize=65536)
def language_subset(t1: Template, t2: Template) -> bool:
    """True iff every string matched by t1 is matched by t2."""
    if t1.source == t2.source:
        return True
    a1, a2 = _automaton(t1), _automaton(t2)
    symbols = sorted(a1.alphabet | a2.alphabet) + [_OTHER]

    start = (0, frozenset({0}))
    seen = {start}
    queue = deque([start])
    while queue:
        q1, s2 = queue.popleft()
        if q1 == a1.final and a2.final not in s2:
            return False
        for symbol in symbols:
            next_s2 = a2.step_all(s2, symbol)
            for next_q1 in a1.step(q1, symbol):
                # Every state of a1 can still reach acceptance, so a dead s2 is a witness.
                if not next_s2:
                    return False
                pair = (next_q1, next_s2)
                if pair not in seen:
                    seen.add(pair)
                    queue.append(pair)
    return True


def strict_subset(t1: Template, t2: Template) -> bool:
    return language_subset(t1, t2) and not language_subset(t2, t1)


def is_constant_specialization(t: Template, v: Template) -> bool:
    """True iff t is v with zero or more wildcards replaced by non-empty constants."""
    t_tokens, v_tokens = t.tokens, v.tokens

    @lru_cache(maxsize=None)
    def align(i: int, offset: int, j: int) -> bool:
        if j == len(v_tokens):
            return i == len(t_tokens)
        if i == len(t_tokens):
            return False
        current, wanted = t_tokens[i], v_tokens[j]

        if not wanted.is_wildcard:
            if current.is_wildcard:
                return False
            end = offset + len(wanted.text)
            if current.text[offset:end] != wanted.text:
                return False
            return align(*_advance(t_tokens, i, end), j + 1)

        if current.is_wildcard:
            # kept wildcard
            return offset == 0 and align(i + 1, 0, j + 1)
        # replaced by a constant taken from t's literal block
        return any(
            align(*_advance(t_tokens, i, end), j + 1)
            for end in range(offset + 1, len(current.text) + 1)
        )

    return align(0, 0, 0)


def _advance(tokens, i: int, offset: int) -> Tuple[int, int]:
    if offset == len(tokens[i].text):
        return i + 1, 0
    return i, offset


_WHITESPACE_SPLIT = re.compile(r"(\s+)")


def is_word_atomic_generalization(t: Template, v: Template) -> bool:
    """True iff t is v with some words containing <*> (other than a bare <*>) wildcarded whole."""
    pieces = []
    for piece in _WHITESPACE_SPLIT.split(v.source):
        if WILDCARD in piece and piece != WILDCARD and not piece.isspace():
            pieces.append(f"(?:{re.escape(piece)}|{re.escape(WILDCARD)})")
        else:
            pieces.append(re.escape(piece))
    return re.fullmatch("".join(pieces), t.source) is not None
