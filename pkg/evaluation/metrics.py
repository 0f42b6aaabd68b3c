"""Template accuracy under the strict / P1 / P2 rules, F1, grouping accuracy
and the OG / UG / MX classification of incorrect templates.

P1 accepts a constant in place of a ground-truth wildcard when that
wildcard only ever binds the same string in the log. P2 accepts a bare <*>
in place of a ground-truth word that contains <*>, as long as no extra
messages get matched.
"""
import logging
from dataclasses import dataclass
from enum import Enum
from typing import Dict, FrozenSet, List, Optional, Sequence, Tuple

from errors import InvalidCounts
from ingest.ground_truth import GroundTruth
from template.core import Template, match_set
from template.relations import (
    is_constant_specialization,
    is_word_atomic_generalization,
    strict_subset,
)

logger = logging.getLogger("TemplateMiner")


@dataclass(frozen=True)
class EvalMode:
    strict_only: bool = True
    apply_p1: bool = False
    apply_p2: bool = False

    def __post_init__(self):
        if self.strict_only and (self.apply_p1 or self.apply_p2):
            raise ValueError("strict mode excludes the P1 and P2 relaxations")

    @classmethod
    def from_flags(cls, p1: bool = False, p2: bool = False) -> "EvalMode":
        return cls(strict_only=not (p1 or p2), apply_p1=p1, apply_p2=p2)

    @property
    def name(self) -> str:
        if self.strict_only:
            return "strict"
        return "+".join(label for label, on in (("P1", self.apply_p1), ("P2", self.apply_p2)) if on)


STRICT = EvalMode.from_flags()
P1 = EvalMode.from_flags(p1=True)
P1_P2 = EvalMode.from_flags(p1=True, p2=True)


class VerdictStatus(Enum):
    CORRECT = "Correct"
    INCORRECT = "Incorrect"
    CORRECT_VIA_P1 = "CorrectViaP1"
    CORRECT_VIA_P2 = "CorrectViaP2"


class ErrorClass(Enum):
    OG = "OG"
    UG = "UG"
    MX = "MX"


@dataclass(frozen=True)
class TemplateVerdict:
    template: Template
    status: VerdictStatus
    matched_gt: Optional[Template] = None
    error_class: Optional[ErrorClass] = None
    matched_messages: int = 0

    @property
    def is_correct(self) -> bool:
        return self.status is not VerdictStatus.INCORRECT

    def to_dict(self) -> Dict:
        return {
            "template": self.template.source,
            "status": self.status.value,
            "matched_gt": self.matched_gt.source if self.matched_gt else None,
            "error_class": self.error_class.value if self.error_class else None,
            "matched_messages": self.matched_messages,
        }


def p1_correct(t: Template, v: Template, log: Sequence) -> bool:
    return is_constant_specialization(t, v) and match_set(t, log) == match_set(v, log)


def p2_correct(t: Template, v: Template, log: Sequence) -> bool:
    return is_word_atomic_generalization(t, v) and match_set(t, log) == match_set(v, log)


def classify_incorrect(t: Template, gt: GroundTruth) -> ErrorClass:
    """OG is checked before UG; MX when t is neither strictly wider nor narrower than any truth template."""
    if any(strict_subset(v, t) for v in gt.templates):
        return ErrorClass.OG
    if any(strict_subset(t, v) for v in gt.templates):
        return ErrorClass.UG
    return ErrorClass.MX


def ground_truth_groups(gt: GroundTruth, log: Sequence) -> List[FrozenSet[int]]:
    return [match_set(v, log).indices for v in gt.templates]


def _covering_template(covered: FrozenSet[int], gt: GroundTruth, groups: Sequence[FrozenSet[int]]) -> Optional[Template]:
    touching = [i for i, group in enumerate(groups) if covered & group]
    if len(touching) == 1:
        return gt.templates[touching[0]]
    if len(touching) > 1:
        # overlapping truth groups: t must sit inside exactly one of them
        containing = [i for i in touching if covered <= groups[i]]
        if len(containing) == 1:
            return gt.templates[containing[0]]
    return None


def assess_template(
    t: Template,
    gt: GroundTruth,
    log: Sequence,
    mode: EvalMode,
    groups: Optional[Sequence[FrozenSet[int]]] = None,
) -> TemplateVerdict:
    if groups is None:
        groups = ground_truth_groups(gt, log)
    covered = match_set(t, log).indices

    # identical to a truth template: correct in every mode, even when truth groups nest
    same = next((v for v in gt.templates if v.source == t.source), None)
    if same is not None:
        return TemplateVerdict(t, VerdictStatus.CORRECT, matched_gt=same, matched_messages=len(covered))
    if not covered:
        return TemplateVerdict(t, VerdictStatus.INCORRECT, error_class=classify_incorrect(t, gt))

    v = _covering_template(covered, gt, groups)
    status = VerdictStatus.INCORRECT
    if v is not None:
        if mode.apply_p1 and p1_correct(t, v, log):
            status = VerdictStatus.CORRECT_VIA_P1
        elif mode.apply_p2 and p2_correct(t, v, log):
            status = VerdictStatus.CORRECT_VIA_P2

    if status is VerdictStatus.INCORRECT:
        return TemplateVerdict(t, status, error_class=classify_incorrect(t, gt), matched_messages=len(covered))
    return TemplateVerdict(t, status, matched_gt=v, matched_messages=len(covered))


def compute_scores(correct: int, detected: int, gt_covered: int, gt_total: int) -> Tuple[float, float, float]:
    if not (0 <= correct <= detected and 0 <= gt_covered <= gt_total and gt_total >= 1):
        raise InvalidCounts(f"invalid counts: correct={correct} detected={detected} "
                            f"gt_covered={gt_covered} gt_total={gt_total}")
    precision = correct / detected if detected else 0.0
    recall = gt_covered / gt_total
    if precision + recall == 0:
        return precision, recall, 0.0
    return precision, recall, 2 * precision * recall / (precision + recall)


def assign_groups(templates: Sequence[Template], log: Sequence) -> List[Optional[int]]:
    """Index of the template each message is assigned to, None when unmatched.

    Among several matching templates the most specific one wins; remaining
    ties go to the longer literal text, then to the lower index.
    """
    sets = [match_set(t, log).indices for t in templates]
    assignment: List[Optional[int]] = []
    for i in range(len(log)):
        candidates = [j for j, s in enumerate(sets) if i in s]
        if len(candidates) > 1:
            minimal = [
                j for j in candidates
                if not any(strict_subset(templates[other], templates[j]) for other in candidates if other != j)
            ]
            candidates = sorted(minimal or candidates, key=lambda j: (-templates[j].literal_length, j))
        assignment.append(candidates[0] if candidates else None)
    return assignment


def _group_sets(assignment: Sequence[Optional[int]]) -> List[FrozenSet[int]]:
    members: Dict[int, set] = {}
    for i, j in enumerate(assignment):
        if j is not None:
            members.setdefault(j, set()).add(i)
    frozen = {j: frozenset(group) for j, group in members.items()}
    return [frozen[j] if j is not None else frozenset({i}) for i, j in enumerate(assignment)]


def grouping_accuracy(detected: Sequence[Template], gt: GroundTruth, log: Sequence) -> float:
    if not log:
        return 0.0
    detected_groups = _group_sets(assign_groups(detected, log))
    truth_groups = _group_sets(assign_groups(gt.templates, log))
    correct = sum(1 for mine, truth in zip(detected_groups, truth_groups) if mine == truth)
    return correct / len(log)
