import os
import json
import logging
from dataclasses import dataclass
from typing import Dict, List, Sequence

import pandas as pd

from evaluation.metrics import (
    STRICT,
    ErrorClass,
    EvalMode,
    TemplateVerdict,
    assess_template,
    compute_scores,
    ground_truth_groups,
    grouping_accuracy,
)
from ingest.ground_truth import GroundTruth
from template.core import Template

logger = logging.getLogger("TemplateMiner")

CSV_COLUMNS = ["dataset", "mode", "correct", "detected", "gt", "precision", "recall", "f1", "ga", "og", "ug", "mx"]


@dataclass
class EvalReport:
    mode: str
    verdicts: List[TemplateVerdict]
    correct_count: int
    detected_count: int
    gt_count: int
    gt_covered: int
    precision: float
    recall: float
    f1: float
    grouping_accuracy: float
    og_count: int
    ug_count: int
    mx_count: int
    dataset: str = ""

    def to_dict(self) -> Dict:
        return {
            "dataset": self.dataset,
            "mode": self.mode,
            "correct_count": self.correct_count,
            "detected_count": self.detected_count,
            "gt_count": self.gt_count,
            "gt_covered": self.gt_covered,
            "precision": self.precision,
            "recall": self.recall,
            "f1": self.f1,
            "grouping_accuracy": self.grouping_accuracy,
            "og_count": self.og_count,
            "ug_count": self.ug_count,
            "mx_count": self.mx_count,
            "verdicts": [verdict.to_dict() for verdict in self.verdicts],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), ensure_ascii=False, indent=2) + "\n"

    def csv_row(self) -> Dict:
        return {
            "dataset": self.dataset,
            "mode": self.mode,
            "correct": self.correct_count,
            "detected": self.detected_count,
            "gt": self.gt_count,
            "precision": round(self.precision, 4),
            "recall": round(self.recall, 4),
            "f1": round(self.f1, 4),
            "ga": round(self.grouping_accuracy, 4),
            "og": self.og_count,
            "ug": self.ug_count,
            "mx": self.mx_count,
        }


class TemplateEvaluator:
    """Judges detected template sets against one ground truth over one log."""

    def __init__(self, gt: GroundTruth, log: Sequence, dataset: str = ""):
        self.gt = gt
        self.log = list(log)
        self.dataset = dataset
        self.groups = ground_truth_groups(gt, self.log)

    def assess(self, t: Template, mode: EvalMode = STRICT) -> TemplateVerdict:
        return assess_template(t, self.gt, self.log, mode, groups=self.groups)

    def evaluate(self, detected: Sequence[Template], mode: EvalMode = STRICT) -> EvalReport:
        logger.info(f"Evaluating {len(detected)} templates against {len(self.gt)} ground truth templates "
                    f"({mode.name}, {len(self.log)} messages)")
        verdicts = [self.assess(t, mode) for t in detected]
        correct = [verdict for verdict in verdicts if verdict.is_correct]
        covered = {verdict.matched_gt.source for verdict in correct}
        precision, recall, f1 = compute_scores(len(correct), len(verdicts), len(covered), len(self.gt))
        classes = [verdict.error_class for verdict in verdicts if not verdict.is_correct]

        return EvalReport(
            mode=mode.name,
            verdicts=verdicts,
            correct_count=len(correct),
            detected_count=len(verdicts),
            gt_count=len(self.gt),
            gt_covered=len(covered),
            precision=precision,
            recall=recall,
            f1=f1,
            grouping_accuracy=grouping_accuracy(detected, self.gt, self.log),
            og_count=classes.count(ErrorClass.OG),
            ug_count=classes.count(ErrorClass.UG),
            mx_count=classes.count(ErrorClass.MX),
            dataset=self.dataset,
        )


def summary_table(reports: Sequence[EvalReport]) -> pd.DataFrame:
    return pd.DataFrame([report.csv_row() for report in reports], columns=CSV_COLUMNS)


def write_csv(reports: Sequence[EvalReport], path: str, append: bool = False) -> None:
    table = summary_table(reports)
    write_header = not (append and os.path.exists(path))
    table.to_csv(path, mode="a" if append else "w", header=write_header, index=False, encoding="utf-8")
    logger.info(f"Evaluation summary saved to {path}")
