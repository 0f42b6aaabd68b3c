from evaluation.metrics import (
    P1,
    P1_P2,
    STRICT,
    ErrorClass,
    EvalMode,
    TemplateVerdict,
    VerdictStatus,
    assess_template,
    assign_groups,
    classify_incorrect,
    compute_scores,
    grouping_accuracy,
    p1_correct,
    p2_correct,
)
from evaluation.report import EvalReport, TemplateEvaluator, summary_table, write_csv
