"""Aggregate detection score: mean AP blended with clamped true-positive error
complements, NDS* = (3*mAP + sum(1 - min(1, err))) / 6 over the translation,
scale, and orientation error means."""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

from .errors import OutOfRange


@dataclass(frozen=True)
class DetectionScores:
    """Pre-aggregated detector quality: mAP plus the three TP error means."""

    mean_ap: float
    translation_error: float  # mATE, meters-normalized
    scale_error: float  # mASE, unitless
    orientation_error: float  # mAOE, radians-normalized

    def __post_init__(self) -> None:
        if not 0.0 <= self.mean_ap <= 1.0:
            raise OutOfRange(f"mean_ap must be in [0, 1], got {self.mean_ap}")
        for name in ("translation_error", "scale_error", "orientation_error"):
            if getattr(self, name) < 0.0:
                raise OutOfRange(f"{name} must be >= 0, got {getattr(self, name)}")


def nds_star(scores: DetectionScores) -> float:
    """The three-error variant with the literal 1/6 divisor."""
    errs = (scores.translation_error, scores.scale_error, scores.orientation_error)
    return (3.0 * scores.mean_ap + sum(1.0 - min(1.0, e) for e in errs)) / 6.0


def weighted_detection_score(mean_ap: float, tp_errors: Sequence[float]) -> float:
    """Generic N-error form: (N*mAP + sum(1 - min(1, err))) / (2N).

    Reduces to nds_star for three errors and to the standard five-error
    composite for five; kept separate so the three-error constant never
    silently changes.
    """
    if not 0.0 <= mean_ap <= 1.0:
        raise OutOfRange(f"mean_ap must be in [0, 1], got {mean_ap}")
    if not tp_errors:
        raise OutOfRange("need at least one true-positive error term")
    if any(e < 0 for e in tp_errors):
        raise OutOfRange("true-positive errors must be >= 0")
    n = len(tp_errors)
    return (n * mean_ap + sum(1.0 - min(1.0, e) for e in tp_errors)) / (2.0 * n)


@dataclass(frozen=True)
class ScoreTableRow:
    """One published benchmark row for validating the aggregation arithmetic.

    nds_reported is the value printed in the source table (3 decimals);
    nds_recomputed is the exact aggregation of the printed inputs;
    reporting_consistent is false for rows where the printed composite cannot
    be reproduced from the printed inputs within half a reporting ULP (5e-4).
    """

    setting: str
    method: str
    scores: DetectionScores
    nds_reported: float
    nds_recomputed: float
    reporting_consistent: bool


def load_score_table(path: str | Path) -> list[ScoreTableRow]:
    rows = []
    with open(path, newline="") as fh:
        for rec in csv.DictReader(fh):
            rows.append(
                ScoreTableRow(
                    setting=rec["setting"],
                    method=rec["method"],
                    scores=DetectionScores(
                        mean_ap=float(rec["map"]),
                        translation_error=float(rec["mate"]),
                        scale_error=float(rec["mase"]),
                        orientation_error=float(rec["maoe"]),
                    ),
                    nds_reported=float(rec["nds_reported"]),
                    nds_recomputed=float(rec["nds_recomputed"]),
                    reporting_consistent=rec["reporting_consistent"].strip() == "1",
                )
            )
    return rows


def validate_score_table(path: str | Path, tol: float = 5e-4) -> list[tuple[ScoreTableRow, float, bool]]:
    """Recompute every row; returns (row, computed, ok) triples.

    A row passes when the implementation matches the exact recomputation to
    1e-12 and, for reporting-consistent rows, the printed value to tol.
    """
    results = []
    for row in load_score_table(path):
        computed = nds_star(row.scores)
        ok = abs(computed - row.nds_recomputed) <= 1e-12
        if row.reporting_consistent:
            ok = ok and abs(computed - row.nds_reported) <= tol + 1e-12
        results.append((row, computed, ok))
    return results
