"""Model-agnostic scoring of classifier predictions.

Consumes a truth manifest plus a predictions CSV (`img,pred,p0,...,p9`;
probability columns optional) and produces confusion matrices, accuracy,
per-class and aggregated precision/recall/F1, and mean cross-entropy when
probabilities are present.

Both micro and macro aggregates are always reported side by side: micro
pools true/false positives across classes (and equals accuracy for
single-label multiclass), macro is the unweighted class mean.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .manifest import DatasetManifest

N_CLASSES = 10
CROSS_ENTROPY_EPS = 1e-12


class EvaluationError(ValueError):
    pass


@dataclass(frozen=True)
class PredictionRecord:
    filename: str
    predicted_label: int
    probabilities: tuple[float, ...] | None = None

    def __post_init__(self):
        if not 0 <= self.predicted_label < N_CLASSES:
            raise ValueError(f"predicted label {self.predicted_label} "
                             "outside 0-9")
        p = self.probabilities
        if p is not None:
            if len(p) != N_CLASSES:
                raise ValueError(f"need {N_CLASSES} probabilities, got {len(p)}")
            if min(p) < 0:
                raise ValueError("probabilities must be >= 0")
            if abs(sum(p) - 1.0) > 1e-6:
                raise ValueError(f"probabilities sum to {sum(p)}, not 1")
            if int(np.argmax(p)) != self.predicted_label:
                raise ValueError("argmax(probabilities) != predicted label")


def parse_predictions(csv_text: str) -> list[PredictionRecord]:
    """Parse `img,pred[,p0..p9]` CSV text."""
    reader = csv.reader(io.StringIO(csv_text))
    try:
        header = [h.strip() for h in next(reader)]
    except StopIteration:
        raise EvaluationError("empty predictions file") from None
    if header[:2] != ["img", "pred"]:
        raise EvaluationError(f"expected header img,pred[,p0..p9], got {header}")
    has_probs = len(header) >= 2 + N_CLASSES
    out = []
    for row_num, row in enumerate(reader, start=2):
        if not row or (len(row) == 1 and not row[0].strip()):
            continue
        try:
            probs = None
            if has_probs:
                probs = tuple(float(v) for v in row[2:2 + N_CLASSES])
            out.append(PredictionRecord(row[0].strip(), int(row[1]), probs))
        except (ValueError, IndexError) as e:
            raise EvaluationError(f"row {row_num}: {e}") from e
    return out


def load_predictions(path: str | Path) -> list[PredictionRecord]:
    return parse_predictions(Path(path).read_text(encoding="utf-8"))


# ---------------------------------------------------------------------------
# Confusion matrix
# ---------------------------------------------------------------------------

def confusion(truth: DatasetManifest,
              preds: list[PredictionRecord]) -> np.ndarray:
    """10x10 counts; rows = true class, columns = predicted class.

    Every prediction filename must be present in the truth manifest and
    appear at most once in `preds`; offenders are listed in the error.
    """
    labels = {s.filename: s.label for s in truth.samples}
    unknown = [p.filename for p in preds if p.filename not in labels]
    if unknown:
        raise EvaluationError("predictions for filenames missing from truth: "
                              + ", ".join(sorted(unknown)[:10]))
    seen = set()
    dups = set()
    for p in preds:
        if p.filename in seen:
            dups.add(p.filename)
        seen.add(p.filename)
    if dups:
        raise EvaluationError("duplicate predictions for: "
                              + ", ".join(sorted(dups)[:10]))
    cm = np.zeros((N_CLASSES, N_CLASSES), dtype=np.int64)
    for p in preds:
        cm[labels[p.filename], p.predicted_label] += 1
    return cm


def normalize_confusion(cm: np.ndarray, mode: str) -> np.ndarray:
    """Normalize rows (`by_true_row`) or columns (`by_predicted_column`).

    The mode is always explicit; an all-zero row/column stays all-zero.
    """
    cm = np.asarray(cm, dtype=np.float64)
    if mode == "by_true_row":
        denom = cm.sum(axis=1, keepdims=True)
    elif mode == "by_predicted_column":
        denom = cm.sum(axis=0, keepdims=True)
    else:
        raise ValueError(f"mode must be by_true_row or by_predicted_column, "
                         f"got {mode!r}")
    return np.divide(cm, denom, out=np.zeros_like(cm), where=denom > 0)


# ---------------------------------------------------------------------------
# Metrics
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class EvalReport:
    n_scored: int
    accuracy: float
    per_class_precision: tuple[float, ...]
    per_class_recall: tuple[float, ...]
    per_class_f1: tuple[float, ...]
    micro_precision: float
    micro_recall: float
    micro_f1: float
    macro_precision: float
    macro_recall: float
    macro_f1: float
    confusion: tuple[tuple[int, ...], ...]
    row_normalized: tuple[tuple[float, ...], ...]
    column_normalized: tuple[tuple[float, ...], ...]
    zero_support_classes: tuple[int, ...] = ()
    mean_cross_entropy: float | None = None

    def to_dict(self) -> dict:
        return {
            "n_scored": self.n_scored,
            "accuracy": self.accuracy,
            "per_class": {
                "precision": list(self.per_class_precision),
                "recall": list(self.per_class_recall),
                "f1": list(self.per_class_f1),
            },
            "micro": {"precision": self.micro_precision,
                      "recall": self.micro_recall, "f1": self.micro_f1},
            "macro": {"precision": self.macro_precision,
                      "recall": self.macro_recall, "f1": self.macro_f1},
            "confusion": [list(r) for r in self.confusion],
            "normalized_by_true_row": [list(r) for r in self.row_normalized],
            "normalized_by_predicted_column":
                [list(r) for r in self.column_normalized],
            "zero_support_classes": list(self.zero_support_classes),
            "mean_cross_entropy": self.mean_cross_entropy,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    @classmethod
    def from_dict(cls, d: dict) -> "EvalReport":
        return cls(
            n_scored=d["n_scored"],
            accuracy=d["accuracy"],
            per_class_precision=tuple(d["per_class"]["precision"]),
            per_class_recall=tuple(d["per_class"]["recall"]),
            per_class_f1=tuple(d["per_class"]["f1"]),
            micro_precision=d["micro"]["precision"],
            micro_recall=d["micro"]["recall"],
            micro_f1=d["micro"]["f1"],
            macro_precision=d["macro"]["precision"],
            macro_recall=d["macro"]["recall"],
            macro_f1=d["macro"]["f1"],
            confusion=tuple(tuple(r) for r in d["confusion"]),
            row_normalized=tuple(tuple(r) for r in
                                 d["normalized_by_true_row"]),
            column_normalized=tuple(tuple(r) for r in
                                    d["normalized_by_predicted_column"]),
            zero_support_classes=tuple(d["zero_support_classes"]),
            mean_cross_entropy=d["mean_cross_entropy"],
        )

    @classmethod
    def from_json(cls, text: str) -> "EvalReport":
        return cls.from_dict(json.loads(text))


def _f1(p: float, r: float) -> float:
    if p == r:  # harmonic mean of equal values is exact (micro-F1 == accuracy)
        return p
    return 2 * p * r / (p + r) if p + r > 0 else 0.0


def metrics(cm: np.ndarray,
            mean_cross_entropy: float | None = None) -> EvalReport:
    """Compute the full report from a confusion matrix.

    Per class c: precision = TP_c/(TP_c+FP_c), recall = TP_c/(TP_c+FN_c),
    F1 their harmonic mean. Micro pools TP/FP/FN over classes; macro is the
    unweighted mean. Classes with a zero denominator score 0 and are listed
    in zero_support_classes.
    """
    cm = np.asarray(cm, dtype=np.int64)
    total = int(cm.sum())
    if total == 0:
        raise EvaluationError("empty confusion matrix")
    tp = np.diag(cm).astype(np.float64)
    fp = cm.sum(axis=0) - tp
    fn = cm.sum(axis=1) - tp

    flagged = []
    prec, rec, f1s = [], [], []
    for c in range(N_CLASSES):
        pd = tp[c] + fp[c]
        rd = tp[c] + fn[c]
        if pd == 0 or rd == 0:
            flagged.append(c)
        p = tp[c] / pd if pd > 0 else 0.0
        r = tp[c] / rd if rd > 0 else 0.0
        prec.append(p)
        rec.append(r)
        f1s.append(_f1(p, r))

    micro_p = float(tp.sum() / (tp.sum() + fp.sum()))
    micro_r = float(tp.sum() / (tp.sum() + fn.sum()))
    accuracy = float(tp.sum() / total)
    return EvalReport(
        n_scored=total,
        accuracy=accuracy,
        per_class_precision=tuple(prec),
        per_class_recall=tuple(rec),
        per_class_f1=tuple(f1s),
        micro_precision=micro_p,
        micro_recall=micro_r,
        micro_f1=_f1(micro_p, micro_r),
        macro_precision=float(np.mean(prec)),
        macro_recall=float(np.mean(rec)),
        macro_f1=float(np.mean(f1s)),
        confusion=tuple(tuple(int(v) for v in row) for row in cm),
        row_normalized=tuple(tuple(map(float, r)) for r in
                             normalize_confusion(cm, "by_true_row")),
        column_normalized=tuple(tuple(map(float, r)) for r in
                                normalize_confusion(cm, "by_predicted_column")),
        zero_support_classes=tuple(flagged),
        mean_cross_entropy=mean_cross_entropy,
    )


def cross_entropy(truth: DatasetManifest,
                  preds: list[PredictionRecord]) -> float:
    """Mean over samples of -log p_true, with p clamped to [1e-12, 1]."""
    missing = [p.filename for p in preds if p.probabilities is None]
    if missing:
        raise EvaluationError("predictions without probabilities: "
                              + ", ".join(sorted(missing)[:10]))
    if not preds:
        raise EvaluationError("no predictions to score")
    labels = {s.filename: s.label for s in truth.samples}
    total = 0.0
    for p in preds:
        p_true = p.probabilities[labels[p.filename]]
        total += -math.log(min(1.0, max(CROSS_ENTROPY_EPS, p_true)))
    return total / len(preds)


def evaluate(truth: DatasetManifest,
             preds: list[PredictionRecord]) -> EvalReport:
    """confusion + metrics (+ cross-entropy when probabilities exist)."""
    cm = confusion(truth, preds)
    ce = None
    if preds and all(p.probabilities is not None for p in preds):
        ce = cross_entropy(truth, preds)
    return metrics(cm, mean_cross_entropy=ce)


# ---------------------------------------------------------------------------
# Rendering
# ---------------------------------------------------------------------------

def render_text_report(report: EvalReport) -> str:
    lines = []
    lines.append(f"samples scored: {report.n_scored}")
    lines.append(f"accuracy:       {report.accuracy:.4f}")
    if report.mean_cross_entropy is not None:
        lines.append(f"cross-entropy:  {report.mean_cross_entropy:.4f}")
    lines.append("")
    lines.append("class  precision  recall     f1")
    for c in range(N_CLASSES):
        flag = "  (zero support)" if c in report.zero_support_classes else ""
        lines.append(f"c{c}     {report.per_class_precision[c]:9.4f}  "
                     f"{report.per_class_recall[c]:9.4f}  "
                     f"{report.per_class_f1[c]:9.4f}{flag}")
    lines.append(f"micro  {report.micro_precision:9.4f}  "
                 f"{report.micro_recall:9.4f}  {report.micro_f1:9.4f}")
    lines.append(f"macro  {report.macro_precision:9.4f}  "
                 f"{report.macro_recall:9.4f}  {report.macro_f1:9.4f}")
    lines.append("")
    lines.append("confusion (rows = true, columns = predicted):")
    header = "      " + "".join(f"p{c:<6d}" for c in range(N_CLASSES))
    lines.append(header)
    for c, row in enumerate(report.confusion):
        lines.append(f"t{c:<4d} " + "".join(f"{v:<7d}" for v in row))
    return "\n".join(lines) + "\n"


def confusion_to_csv(cm) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["true\\pred"] + [f"c{c}" for c in range(N_CLASSES)])
    for c, row in enumerate(cm):
        writer.writerow([f"c{c}"] + [str(v) for v in row])
    return buf.getvalue()


def confusion_heatmap_png(norm_cm, path: str | Path, cell: int = 32) -> None:
    """Render a normalized matrix as a grayscale PNG (bright = high)."""
    from PIL import Image
    a = np.asarray(norm_cm, dtype=np.float64)
    if a.min() < 0 or a.max() > 1:
        raise ValueError("expected a normalized matrix in [0, 1]")
    img = np.clip(np.rint(a * 255), 0, 255).astype(np.uint8)
    img = np.kron(img, np.ones((cell, cell), dtype=np.uint8))
    Image.fromarray(img, mode="L").save(path)
