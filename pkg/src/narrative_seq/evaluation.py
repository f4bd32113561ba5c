"""Confusion matrices, precision/recall/F1/accuracy, and results rendering.

Aggregates are computed under both macro and weighted averaging because the
reported numbers do not pin the mode; the rendered table defaults to
weighted, which behaves consistently with accuracy under heavy class
imbalance. Any 0/0 is defined as 0 and flagged rather than NaN so
aggregation never silently poisons.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .corpus_ingest import ClassDistribution, DamageLabel
from .errors import DimensionError
from .text_pipeline import NUM_CLASSES

AVERAGING_MODES = ("macro", "weighted")


@dataclass(frozen=True)
class ConfusionMatrix:
    """4x4 counts; rows are true labels, columns are predictions."""

    counts: np.ndarray

    def __post_init__(self):
        if self.counts.shape != (NUM_CLASSES, NUM_CLASSES):
            raise DimensionError(
                f"confusion matrix must be {NUM_CLASSES}x{NUM_CLASSES}, "
                f"got {self.counts.shape}"
            )

    @property
    def total(self) -> int:
        return int(self.counts.sum())


@dataclass(frozen=True)
class ClassMetrics:
    label: DamageLabel
    precision: float
    recall: float
    f1: float
    support: int
    zero_support: bool = False     # no true instances of this class
    zero_predictions: bool = False  # the class was never predicted


@dataclass(frozen=True)
class MetricsReport:
    """Per-class and aggregated metrics for one trained model."""

    per_class: tuple[ClassMetrics, ...]
    accuracy: float
    precision: float
    recall: float
    f1: float
    averaging_mode: str

    def to_dict(self) -> dict:
        return {
            "averaging_mode": self.averaging_mode,
            "accuracy": self.accuracy,
            "precision": self.precision,
            "recall": self.recall,
            "f1": self.f1,
            "per_class": [
                {
                    "label": c.label.display_name,
                    "precision": c.precision,
                    "recall": c.recall,
                    "f1": c.f1,
                    "support": c.support,
                    "zero_support": c.zero_support,
                    "zero_predictions": c.zero_predictions,
                }
                for c in self.per_class
            ],
        }


def confusion_matrix(preds: Sequence[DamageLabel | int],
                     labels: Sequence[DamageLabel | int]) -> ConfusionMatrix:
    """Count (true, predicted) pairs into a 4x4 matrix."""
    if len(preds) != len(labels):
        raise DimensionError(
            f"{len(preds)} predictions vs {len(labels)} labels"
        )
    if len(preds) == 0:
        raise DimensionError("confusion_matrix needs at least one pair")
    counts = np.zeros((NUM_CLASSES, NUM_CLASSES), dtype=np.int64)
    np.add.at(
        counts,
        (np.asarray(labels, dtype=np.int64), np.asarray(preds, dtype=np.int64)),
        1,
    )
    return ConfusionMatrix(counts=counts)


def compute_metrics(cm: ConfusionMatrix, mode: str = "weighted") -> MetricsReport:
    """Per-class precision/recall/F1 plus the aggregate under ``mode``."""
    if mode not in AVERAGING_MODES:
        raise ValueError(f"averaging mode must be one of {AVERAGING_MODES}, got {mode!r}")
    counts = cm.counts
    total = cm.total
    if total < 1:
        raise ValueError("cannot compute metrics over an empty confusion matrix")
    per_class = []
    for c in range(NUM_CLASSES):
        tp = int(counts[c, c])
        col = int(counts[:, c].sum())
        row = int(counts[c, :].sum())
        precision = tp / col if col else 0.0
        recall = tp / row if row else 0.0
        f1 = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
        per_class.append(
            ClassMetrics(
                label=DamageLabel(c),
                precision=precision,
                recall=recall,
                f1=f1,
                support=row,
                zero_support=row == 0,
                zero_predictions=col == 0,
            )
        )
    if mode == "macro":
        agg_p = sum(c.precision for c in per_class) / NUM_CLASSES
        agg_r = sum(c.recall for c in per_class) / NUM_CLASSES
        agg_f = sum(c.f1 for c in per_class) / NUM_CLASSES
    else:
        agg_p = sum(c.precision * c.support for c in per_class) / total
        agg_r = sum(c.recall * c.support for c in per_class) / total
        agg_f = sum(c.f1 * c.support for c in per_class) / total
    return MetricsReport(
        per_class=tuple(per_class),
        accuracy=float(np.trace(counts)) / total,
        precision=agg_p,
        recall=agg_r,
        f1=agg_f,
        averaging_mode=mode,
    )


def majority_baseline(dist: ClassDistribution) -> float:
    """Accuracy of always predicting the most frequent class: the honest
    floor to compare model accuracy against on imbalanced data."""
    if dist.total < 1:
        raise ValueError("majority baseline needs a nonempty distribution")
    return max(dist.counts.values()) / dist.total


@dataclass(frozen=True)
class PercentStyle:
    """Rounding for the rendered table: integer percent for
    precision/recall/F1, one decimal for accuracy."""

    metric_decimals: int = 0
    accuracy_decimals: int = 1


_TABLE_HEADERS = ("Model", "Precision(%)", "Recall(%)", "F1(%)", "Accuracy(%)")


def render_results_table(rows: Sequence[tuple[str, MetricsReport]],
                         style: PercentStyle = PercentStyle()) -> tuple[str, str]:
    """(text table, CSV sibling) for a list of (model name, report) rows.

    The text table rounds percentages per ``style``; the CSV carries the
    unrounded fractions so no information is lost to display rounding.
    """
    if not rows:
        raise ValueError("render_results_table needs at least one row")
    formatted = []
    for name, report in rows:
        formatted.append(
            (
                name,
                f"{report.precision * 100:.{style.metric_decimals}f}",
                f"{report.recall * 100:.{style.metric_decimals}f}",
                f"{report.f1 * 100:.{style.metric_decimals}f}",
                f"{report.accuracy * 100:.{style.accuracy_decimals}f}",
            )
        )
    widths = [
        max(len(_TABLE_HEADERS[col]), max(len(r[col]) for r in formatted))
        for col in range(5)
    ]
    def line(cells):
        first = cells[0].ljust(widths[0])
        rest = "  ".join(cells[i].rjust(widths[i]) for i in range(1, 5))
        return f"{first}  {rest}"

    text_lines = [line(_TABLE_HEADERS), line(tuple("-" * w for w in widths))]
    text_lines += [line(r) for r in formatted]
    text = "\n".join(text_lines) + "\n"

    csv_lines = ["model,precision,recall,f1,accuracy,averaging"]
    for name, report in rows:
        csv_lines.append(
            f"{name},{report.precision!r},{report.recall!r},{report.f1!r},"
            f"{report.accuracy!r},{report.averaging_mode}"
        )
    return text, "\n".join(csv_lines) + "\n"


def format_evaluation_summary(weighted: MetricsReport, macro: MetricsReport,
                              baseline: float) -> str:
    """Human-readable evaluation block; prints the majority baseline right
    next to model accuracy so imbalanced wins cannot masquerade as skill."""
    lines = [
        f"Accuracy:                 {weighted.accuracy:.4f}",
        f"Majority-class baseline:  {baseline:.4f}",
        "",
        "Class         Precision  Recall      F1  Support",
    ]
    for c in weighted.per_class:
        flags = []
        if c.zero_support:
            flags.append("no-support")
        if c.zero_predictions:
            flags.append("never-predicted")
        suffix = f"  [{', '.join(flags)}]" if flags else ""
        lines.append(
            f"{c.label.display_name:<12}  {c.precision:9.4f}  {c.recall:6.4f}  "
            f"{c.f1:6.4f}  {c.support:7d}{suffix}"
        )
    lines.append("")
    lines.append(
        f"Aggregate (weighted): precision {weighted.precision:.4f}, "
        f"recall {weighted.recall:.4f}, F1 {weighted.f1:.4f}"
    )
    lines.append(
        f"Aggregate (macro):    precision {macro.precision:.4f}, "
        f"recall {macro.recall:.4f}, F1 {macro.f1:.4f}"
    )
    return "\n".join(lines) + "\n"


def metrics_to_dict(weighted: MetricsReport, macro: MetricsReport,
                    cm: ConfusionMatrix, baseline: float) -> dict:
    """Full metrics payload for the per-model JSON artifact."""
    return {
        "accuracy": weighted.accuracy,
        "majority_baseline": baseline,
        "confusion": cm.counts.tolist(),
        "per_class": weighted.to_dict()["per_class"],
        "aggregates": {
            "weighted": {
                "precision": weighted.precision,
                "recall": weighted.recall,
                "f1": weighted.f1,
            },
            "macro": {
                "precision": macro.precision,
                "recall": macro.recall,
                "f1": macro.f1,
            },
        },
    }
