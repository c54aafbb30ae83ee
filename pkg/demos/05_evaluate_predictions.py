#!/usr/bin/env python3
"""Score a synthetic classifier against ground truth.

Simulates a model that is right 60% of the time, evaluates it, prints the
plaintext report, and renders the two normalized confusion heatmaps.
"""

from pathlib import Path

import numpy as np

from driveraug.evaluation import (
    PredictionRecord,
    confusion_heatmap_png,
    evaluate,
    render_text_report,
)
from driveraug.manifest import parse_manifest

HERE = Path(__file__).resolve().parent
OUT = HERE / "output"


def main():
    OUT.mkdir(exist_ok=True)
    rng = np.random.default_rng(1)
    n = 2000
    truth_labels = rng.integers(0, 10, n)
    rows = "\n".join(f"p001,c{lab},img_{i}.jpg"
                     for i, lab in enumerate(truth_labels))
    truth = parse_manifest("subject,classname,img\n" + rows + "\n")

    preds = []
    for i, lab in enumerate(truth_labels):
        guess = int(lab) if rng.random() < 0.6 else int(rng.integers(0, 10))
        p = np.full(10, 0.02)
        p[guess] = 1.0 - p.sum() + p[guess]
        preds.append(PredictionRecord(f"img_{i}.jpg", guess,
                                      tuple(p / p.sum())))

    report = evaluate(truth, preds)
    print(render_text_report(report))
    confusion_heatmap_png(report.row_normalized,
                          OUT / "05_confusion_by_true_row.png")
    confusion_heatmap_png(report.column_normalized,
                          OUT / "05_confusion_by_predicted_column.png")
    print(f"heatmaps in {OUT}")


if __name__ == "__main__":
    main()
