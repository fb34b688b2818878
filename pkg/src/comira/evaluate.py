"""Accuracy-vs-PMI analysis: VQA accuracy, quantile bins, Pearson r, accuracy gap.

Reports use equal-count quantile bins over PMI (sizes differ by at most
one; PMI ties keep input order via stable sort). Pearson r is reported at
the bin level, matching how accuracy curves are usually presented, and a
record-level r is included for transparency. The accuracy gap is the mean
correctness of the top ``ceil(f*n)`` records by PMI minus the bottom
``ceil(f*n)``, with ties broken by example_id for determinism.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import asdict, dataclass
from typing import Sequence

from .errors import UndefinedCorrelationError
from .scoring import normalize_answer

DEFAULT_NUM_BINS = 20
DEFAULT_TAIL_FRACTION = 0.05


@dataclass(frozen=True)
class EvalRecord:
    example_id: str
    pmi: float
    correctness: float
    predicted_answer: str | None = None
    ground_truth_is_yes: bool | None = None

    def __post_init__(self):
        if not 0.0 <= self.correctness <= 1.0:
            raise ValueError(f"correctness must be in [0, 1], got {self.correctness}")


@dataclass(frozen=True)
class Bin:
    pmi_mean: float
    accuracy: float
    n: int


@dataclass(frozen=True)
class YesRateBin:
    pmi_mean: float
    yes_rate: float
    n: int


@dataclass
class BinnedReport:
    bins: list[Bin]
    pearson_r: float | None  # bin-level; None when undefined (zero variance)
    pearson_r_records: float | None
    accuracy_gap: float
    tail_fraction: float
    excluded: int


def vqa_accuracy(
    prediction: str,
    human_answers: Sequence[str],
    mode: str = "official",
) -> float:
    """Human-consensus VQA accuracy.

    Official mode averages min(matches/3, 1) over all leave-one-out
    annotator subsets; simple mode uses the full answer set directly. With
    fewer than 4 answers the subsets are too small to be meaningful and
    simple mode is forced.
    """
    if not human_answers:
        raise ValueError("vqa_accuracy needs at least one human answer")
    if mode not in ("official", "simple"):
        raise ValueError(f"unknown vqa accuracy mode: {mode!r}")
    pred = normalize_answer(prediction)
    hits = [normalize_answer(a) == pred for a in human_answers]
    total = sum(hits)
    if mode == "simple" or len(human_answers) < 4:
        return min(total / 3.0, 1.0)
    scores = []
    for i in range(len(hits)):
        matches = total - (1 if hits[i] else 0)
        scores.append(min(matches / 3.0, 1.0))
    return math.fsum(scores) / len(scores)


def topk_correct(ranked_predictions: Sequence[str], label: str, k: int) -> bool:
    """Whether ``label`` appears in the first k ranked predictions."""
    if k < 1:
        raise ValueError("k must be >= 1")
    if not ranked_predictions:
        raise ValueError("ranked prediction list is empty")
    return label in ranked_predictions[:k]


def _quantile_groups(
    pmis: Sequence[float], num_bins: int
) -> list[list[int]]:
    """Indices grouped into equal-count bins by ascending pmi (stable on ties)."""
    n = len(pmis)
    if num_bins < 2:
        raise ValueError("num_bins must be >= 2")
    if n < num_bins:
        raise ValueError(f"need at least {num_bins} records, got {n}")
    order = sorted(range(n), key=lambda i: pmis[i])
    base, extras = divmod(n, num_bins)
    groups = []
    start = 0
    for b in range(num_bins):
        size = base + (1 if b < extras else 0)
        groups.append(order[start : start + size])
        start += size
    return groups


def bin_accuracy(records: Sequence[EvalRecord], num_bins: int) -> list[Bin]:
    """Equal-count quantile bins with per-bin mean PMI and mean correctness."""
    groups = _quantile_groups([r.pmi for r in records], num_bins)
    bins = []
    for group in groups:
        bins.append(
            Bin(
                pmi_mean=math.fsum(records[i].pmi for i in group) / len(group),
                accuracy=math.fsum(records[i].correctness for i in group) / len(group),
                n=len(group),
            )
        )
    return bins


def pearson_r(points: Sequence[tuple[float, float]]) -> float:
    """Sample Pearson correlation; errors on fewer than 2 points or zero variance."""
    if len(points) < 2:
        raise ValueError("pearson_r needs at least two points")
    n = len(points)
    mean_x = math.fsum(p[0] for p in points) / n
    mean_y = math.fsum(p[1] for p in points) / n
    sxx = math.fsum((p[0] - mean_x) ** 2 for p in points)
    syy = math.fsum((p[1] - mean_y) ** 2 for p in points)
    if sxx == 0.0 or syy == 0.0:
        raise UndefinedCorrelationError(
            "correlation undefined: zero variance in x or y"
        )
    sxy = math.fsum((p[0] - mean_x) * (p[1] - mean_y) for p in points)
    return sxy / math.sqrt(sxx * syy)


def accuracy_gap(
    records: Sequence[EvalRecord],
    tail_fraction: float = DEFAULT_TAIL_FRACTION,
) -> float:
    """Mean correctness of the top PMI tail minus the bottom PMI tail."""
    if not 0.0 < tail_fraction <= 0.5:
        raise ValueError("tail_fraction must be in (0, 0.5]")
    n = len(records)
    tail = math.ceil(tail_fraction * n)
    if tail < 1 or 2 * tail > n:
        raise ValueError(
            f"too few records ({n}) for tail_fraction={tail_fraction}"
        )
    ordered = sorted(records, key=lambda r: (r.pmi, r.example_id))
    bottom = ordered[:tail]
    top = ordered[-tail:]
    return (
        math.fsum(r.correctness for r in top) / tail
        - math.fsum(r.correctness for r in bottom) / tail
    )


def yes_rate_by_pmi(
    records: Sequence[EvalRecord], num_bins: int
) -> list[YesRateBin]:
    """Per-bin rate of "yes" predictions over yes-ground-truth records.

    Callers must pass records filtered to ground_truth_is_yes whose pmi was
    computed from question concepts only.
    """
    if not records:
        raise ValueError("no records with ground truth 'yes'")
    for r in records:
        if r.predicted_answer is None or r.ground_truth_is_yes is not True:
            raise ValueError(
                "yes_rate_by_pmi needs records with predicted_answer set and "
                "ground_truth_is_yes=True"
            )
    is_yes = [1.0 if normalize_answer(r.predicted_answer) == "yes" else 0.0
              for r in records]
    groups = _quantile_groups([r.pmi for r in records], num_bins)
    bins = []
    for group in groups:
        bins.append(
            YesRateBin(
                pmi_mean=math.fsum(records[i].pmi for i in group) / len(group),
                yes_rate=math.fsum(is_yes[i] for i in group) / len(group),
                n=len(group),
            )
        )
    return bins


def build_report(
    records: Sequence[EvalRecord],
    num_bins: int = DEFAULT_NUM_BINS,
    tail_fraction: float = DEFAULT_TAIL_FRACTION,
    excluded: int = 0,
) -> BinnedReport:
    """Assemble the full binned accuracy report for a record set."""
    bins = bin_accuracy(records, num_bins)
    try:
        bin_r = pearson_r([(b.pmi_mean, b.accuracy) for b in bins])
    except UndefinedCorrelationError:
        bin_r = None
    try:
        rec_r = pearson_r([(r.pmi, r.correctness) for r in records])
    except UndefinedCorrelationError:
        rec_r = None
    return BinnedReport(
        bins=bins,
        pearson_r=bin_r,
        pearson_r_records=rec_r,
        accuracy_gap=accuracy_gap(records, tail_fraction),
        tail_fraction=tail_fraction,
        excluded=excluded,
    )


def emit_report(report: BinnedReport, path: str, format: str = "json") -> None:
    """Serialize a report. JSON is lossless; CSV holds the plot-ready bins."""
    if format == "json":
        payload = {
            "bins": [asdict(b) for b in report.bins],
            "pearson_r": report.pearson_r,
            "pearson_r_records": report.pearson_r_records,
            "accuracy_gap": report.accuracy_gap,
            "tail_fraction": report.tail_fraction,
            "excluded": report.excluded,
        }
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(payload, fh, indent=2)
            fh.write("\n")
    elif format == "csv":
        with open(path, "w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["bin_index", "pmi_mean", "accuracy", "n"])
            for i, b in enumerate(report.bins):
                writer.writerow([i, b.pmi_mean, b.accuracy, b.n])
    else:
        raise ValueError(f"unknown report format: {format!r}")


def load_report(path: str) -> BinnedReport:
    with open(path, encoding="utf-8") as fh:
        payload = json.load(fh)
    return BinnedReport(
        bins=[Bin(**b) for b in payload["bins"]],
        pearson_r=payload["pearson_r"],
        pearson_r_records=payload["pearson_r_records"],
        accuracy_gap=payload["accuracy_gap"],
        tail_fraction=payload["tail_fraction"],
        excluded=payload["excluded"],
    )
