"""Test labeling, false-positive filtering, and classifier-quality metrics.

Each unit test acts as a binary classifier of solutions: it "accepts" a
solution when the solution passes it. With the positive class being
"solution is correct":

    accuracy = (tp + tn) / (tp + fn + fp + tn)
    f1       = 2 tp / (2 tp + fp + fn)
    far      = fp / (fp + tn)   false acceptance rate (accepts wrong code)
    frr      = fn / (tp + fn)   false rejection rate (rejects correct code)

Rates whose denominator is zero (single-class pools) are reported as None,
never silently 0.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .reward import VerdictMatrix

FILTER_POLICIES = ("accepts_all_incorrect", "accepts_any_incorrect", "min_reject_fraction")


@dataclass(frozen=True)
class ConfusionCounts:
    tp: int
    fn: int
    fp: int
    tn: int

    @property
    def total(self) -> int:
        return self.tp + self.fn + self.fp + self.tn


@dataclass(frozen=True)
class QualityReport:
    scope: str  # "per_test:<test_id>" or "ensemble:<m>"
    counts: ConfusionCounts
    accuracy: float
    f1: float | None
    far: float | None
    frr: float | None

    def csv_row(self) -> list[str]:
        kind, _, ident = self.scope.partition(":")
        fmt = lambda v: "" if v is None else repr(float(v))
        return [kind, ident, fmt(self.accuracy), fmt(self.f1), fmt(self.far), fmt(self.frr)]


def _gold_mask(matrix: VerdictMatrix, gold_labels: dict[str, bool]) -> np.ndarray:
    missing = [s for s in matrix.solution_ids if s not in gold_labels]
    if missing:
        raise ValueError(f"solutions without gold labels: {missing[:5]}")
    return np.array([gold_labels[s] for s in matrix.solution_ids], dtype=bool)


def _report(scope: str, accepts: np.ndarray, correct: np.ndarray) -> QualityReport:
    tp = int((accepts & correct).sum())
    fn = int((~accepts & correct).sum())
    fp = int((accepts & ~correct).sum())
    tn = int((~accepts & ~correct).sum())
    counts = ConfusionCounts(tp, fn, fp, tn)
    f1_den = 2 * tp + fp + fn
    return QualityReport(
        scope=scope,
        counts=counts,
        accuracy=(tp + tn) / counts.total,
        f1=(2 * tp / f1_den) if f1_den > 0 else None,
        far=(fp / (fp + tn)) if (fp + tn) > 0 else None,
        frr=(fn / (tp + fn)) if (tp + fn) > 0 else None,
    )


def label_tests(matrix: VerdictMatrix, gold_labels: dict[str, bool]) -> dict[str, str]:
    """Label each test valid/invalid by execution against correct solutions.

    A test is valid iff every labeled-correct solution passes it.
    """
    correct = _gold_mask(matrix, gold_labels)
    if not correct.any():
        raise ValueError(f"problem {matrix.problem_id!r}: no labeled-correct solution")
    all_correct_pass = matrix.bits[correct].all(axis=0)
    return {
        tid: ("valid" if ok else "invalid")
        for tid, ok in zip(matrix.test_ids, all_correct_pass)
    }


def filter_false_positive(matrix: VerdictMatrix, gold_labels: dict[str, bool],
                          policy: str = "accepts_all_incorrect",
                          tau: float | None = None) -> list[str]:
    """Keep valid tests that show discriminative power against incorrect code.

    Policies (applied after validity labeling, on the incorrect pool):
      accepts_all_incorrect  drop a test only if it accepts every incorrect
                             solution (the default, weakest filter)
      accepts_any_incorrect  drop a test if it accepts any incorrect solution
      min_reject_fraction    keep a test iff it rejects at least tau of the
                             incorrect solutions
    """
    if policy not in FILTER_POLICIES:
        raise ValueError(f"unknown policy {policy!r}")
    if policy == "min_reject_fraction" and tau is None:
        raise ValueError("min_reject_fraction requires tau")
    correct = _gold_mask(matrix, gold_labels)
    incorrect = ~correct
    if not incorrect.any():
        raise ValueError(f"problem {matrix.problem_id!r}: no labeled-incorrect solutions")
    validity = label_tests(matrix, gold_labels)

    kept: list[str] = []
    inc_bits = matrix.bits[incorrect]
    n_inc = int(incorrect.sum())
    for j, tid in enumerate(matrix.test_ids):
        if validity[tid] != "valid":
            continue
        accepted = int(inc_bits[:, j].sum())
        rejected = n_inc - accepted
        if policy == "accepts_all_incorrect":
            keep = accepted < n_inc
        elif policy == "accepts_any_incorrect":
            keep = accepted == 0
        else:
            keep = (rejected / n_inc) >= tau
        if keep:
            kept.append(tid)
    return kept


def test_quality(matrix: VerdictMatrix, gold_labels: dict[str, bool], test_id: str) -> QualityReport:
    """Confusion metrics for a single test's column."""
    try:
        j = matrix.test_ids.index(test_id)
    except ValueError:
        raise KeyError(f"unknown test_id {test_id!r}") from None
    correct = _gold_mask(matrix, gold_labels)
    accepts = matrix.bits[:, j].astype(bool)
    return _report(f"per_test:{test_id}", accepts, correct)


def ensemble_quality(matrix: VerdictMatrix, gold_labels: dict[str, bool],
                     rule: str = "strict_majority", theta: float | None = None) -> QualityReport:
    """Confusion metrics for the whole test pool voting as one classifier.

    strict_majority accepts a solution iff it passes more than M/2 tests;
    rule="threshold" accepts iff it passes at least theta * M.
    """
    m = matrix.n_tests
    if m < 1:
        raise ValueError("ensemble requires at least one test")
    correct = _gold_mask(matrix, gold_labels)
    votes = matrix.bits.sum(axis=1, dtype=np.int64)
    if rule == "strict_majority":
        accepts = votes > m / 2
    elif rule == "threshold":
        if theta is None:
            raise ValueError("rule='threshold' requires theta")
        accepts = votes >= theta * m
    else:
        raise ValueError(f"unknown rule {rule!r}")
    return _report(f"ensemble:{m}", accepts, correct)
