"""Evaluation metrics: per-class accuracy, confusion matrix, challenge score.

Class order everywhere is AGR, DSG, DSC, UNR. The challenge score awards
0.25 for getting related-vs-unrelated right plus a further 0.75 for the exact
label of a related pair, reported as a percentage of the maximum achievable.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .data import N_CLASSES, StanceLabel
from .errors import ContractError, ParameterError


def _as_label_array(labels) -> np.ndarray:
    arr = np.array([int(x) for x in labels], dtype=np.int64)
    if arr.size and (arr.min() < 0 or arr.max() >= N_CLASSES):
        raise ParameterError("labels must be the four stances")
    return arr


@dataclass
class EvaluationReport:
    per_class_accuracy: np.ndarray  # (4,) recall per gold class, 0.0 if absent
    overall_accuracy: float
    fnc_score_percent: float
    confusion: np.ndarray           # (4, 4) counts, rows = gold, cols = predicted

    def to_dict(self) -> dict:
        return {
            "per_class_accuracy": [float(x) for x in self.per_class_accuracy],
            "overall_accuracy": float(self.overall_accuracy),
            "fnc_score": float(self.fnc_score_percent),
            "confusion_matrix": self.confusion.tolist(),
            "class_order": [c.text for c in StanceLabel],
        }

    def to_json(self, **kwargs) -> str:
        return json.dumps(self.to_dict(), **kwargs)

    def render_confusion(self) -> str:
        names = [c.name for c in StanceLabel]
        width = max(6, len(str(int(self.confusion.max(initial=1)))) + 2)
        lines = ["gold\\pred" + "".join(f"{n:>{width}}" for n in names)]
        for i, name in enumerate(names):
            row = "".join(f"{int(v):>{width}}" for v in self.confusion[i])
            lines.append(f"{name:>9}{row}")
        return "\n".join(lines)


def confusion_matrix(predictions, gold) -> np.ndarray:
    pred = _as_label_array(predictions)
    true = _as_label_array(gold)
    if pred.shape != true.shape:
        raise ContractError(
            f"{pred.size} predictions for {true.size} gold labels"
        )
    matrix = np.zeros((N_CLASSES, N_CLASSES), dtype=np.int64)
    np.add.at(matrix, (true, pred), 1)
    return matrix


def fnc_score(predictions, gold) -> float:
    """Challenge-convention weighted score as a percent of the maximum."""
    pred = _as_label_array(predictions)
    true = _as_label_array(gold)
    if pred.shape != true.shape:
        raise ContractError(f"{pred.size} predictions for {true.size} gold labels")
    if pred.size == 0:
        raise ParameterError("fnc_score needs at least one sample")
    unr = int(StanceLabel.UNR)
    gold_related = true != unr
    pred_related = pred != unr
    points = 0.25 * np.sum(gold_related == pred_related)
    points += 0.75 * np.sum(gold_related & (pred == true))
    maximum = 0.25 * np.sum(~gold_related) + 1.0 * np.sum(gold_related)
    return float(100.0 * points / maximum)


def evaluate(predictions, gold) -> EvaluationReport:
    pred = _as_label_array(predictions)
    true = _as_label_array(gold)
    if pred.shape != true.shape:
        raise ContractError(f"{pred.size} predictions for {true.size} gold labels")
    if pred.size == 0:
        raise ParameterError("evaluate needs at least one sample")
    confusion = confusion_matrix(pred, true)
    row_sums = confusion.sum(axis=1)
    with np.errstate(invalid="ignore", divide="ignore"):
        per_class = np.where(row_sums > 0, np.diag(confusion) / row_sums, 0.0)
    overall = float(np.trace(confusion) / confusion.sum())
    return EvaluationReport(
        per_class_accuracy=per_class,
        overall_accuracy=overall,
        fnc_score_percent=fnc_score(pred, true),
        confusion=confusion,
    )
