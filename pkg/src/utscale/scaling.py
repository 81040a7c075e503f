"""Bootstrap scaling experiments: best-of-n accuracy over (n, m) grids.

For a grid point (n, m), each bootstrap sample draws, per problem, n solution
indices and m test indices with replacement, selects the solution passing the
most drawn tests (first index on ties; draw order is random so this is
unbiased), scores it against the gold labels, and averages over problems.
The curve reports the mean and the 2.5/97.5 percentile interval over samples.

Draws for one problem are seeded from (seed, problem_id, n, m), so adding or
removing problems or grid points never reshuffles the others. An exhaustive
enumeration mode replaces sampling with the exact expectation over all index
tuples (feasible for small pools; used by oracle tests).

Resampling is with replacement for both axes, so m may exceed the pool size
M; drawing repeated tests simply reweights votes.
"""

from __future__ import annotations

import hashlib
import itertools
import json
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from .reward import VerdictMatrix

_EXACT_CELL_CAP = 20_000_000


def subseed(*parts) -> int:
    """Stable 64-bit seed derived from heterogeneous parts."""
    text = "\x1f".join(str(p) for p in parts)
    return int.from_bytes(hashlib.sha256(text.encode("utf-8")).digest()[:8], "big")


def _aligned_gold(matrix: VerdictMatrix, gold_labels: Mapping[str, bool]) -> np.ndarray:
    missing = [s for s in matrix.solution_ids if s not in gold_labels]
    if missing:
        raise ValueError(f"problem {matrix.problem_id!r}: no gold label for {missing[:5]}")
    return np.array([bool(gold_labels[s]) for s in matrix.solution_ids], dtype=bool)


def _success_samples(bits: np.ndarray, gold: np.ndarray, n: int, m: int,
                     samples: int, rng: np.random.Generator) -> np.ndarray:
    """Per-sample 0/1 outcomes of select-then-score for one problem."""
    n_sol, n_test = bits.shape
    rows = rng.integers(0, n_sol, size=(samples, n))
    if m > 0:
        if n_test == 0:
            raise ValueError("cannot draw tests from an empty pool")
        cols = rng.integers(0, n_test, size=(samples, m))
        counts = bits[rows[:, :, None], cols[:, None, :]].sum(axis=2)
        pick = counts.argmax(axis=1)  # first maximum = lowest drawn index
    else:
        pick = np.zeros(samples, dtype=np.intp)
    chosen = rows[np.arange(samples), pick]
    return gold[chosen].astype(np.uint8)


def _success_exact(bits: np.ndarray, gold: np.ndarray, n: int, m: int) -> float:
    """Exact expectation of select-then-score over all with-replacement draws."""
    n_sol, n_test = bits.shape
    if m > 0 and n_test == 0:
        raise ValueError("cannot draw tests from an empty pool")
    cells = (n_sol ** n) * max(1, n_test ** m) * n
    if cells > _EXACT_CELL_CAP:
        raise ValueError(f"enumeration of {cells} cells exceeds the exact-mode cap")
    rows = np.array(list(itertools.product(range(n_sol), repeat=n)), dtype=np.intp)
    if m == 0:
        return float(gold[rows[:, 0]].mean())
    cols = np.array(list(itertools.product(range(n_test), repeat=m)), dtype=np.intp)
    # counts[r, c, i] = tests passed by the i-th drawn solution of row-tuple r
    # under column-tuple c
    counts = bits[rows[:, None, :, None], cols[None, :, None, :]].sum(axis=3)
    pick = counts.argmax(axis=2)
    chosen = rows[np.arange(rows.shape[0])[:, None], pick]
    return float(gold[chosen].mean())


def _validate_point(matrices: Mapping[str, VerdictMatrix], n: int, m: int) -> None:
    if m < 0:
        raise ValueError("m must be non-negative")
    for pid, matrix in matrices.items():
        if not 1 <= n <= matrix.n_solutions:
            raise ValueError(
                f"problem {pid!r}: n={n} outside 1..{matrix.n_solutions}")
        if m > 0 and matrix.n_tests == 0:
            raise ValueError(f"problem {pid!r}: m={m} but the test pool is empty")


def best_of_n_accuracy(matrices: Mapping[str, VerdictMatrix],
                       gold_labels: Mapping[str, Mapping[str, bool]],
                       n: int, m: int, seed: int, samples: int = 100,
                       method: str = "bootstrap") -> tuple[float, float, float]:
    """Mean best-of-n accuracy at (n, m) with a percentile confidence interval.

    method="exact" returns the exact expectation (interval collapses to it).
    """
    if not matrices:
        raise ValueError("no matrices given")
    _validate_point(matrices, n, m)
    if method == "exact":
        probs = [
            _success_exact(matrices[pid].bits.astype(np.int64),
                           _aligned_gold(matrices[pid], gold_labels[pid]), n, m)
            for pid in matrices
        ]
        mean = float(np.mean(probs))
        return mean, mean, mean
    if method != "bootstrap":
        raise ValueError(f"unknown method {method!r}")
    if samples < 1:
        raise ValueError("samples must be positive")
    per_problem = np.empty((len(matrices), samples), dtype=np.uint8)
    for row, pid in enumerate(matrices):
        rng = np.random.default_rng(subseed(seed, pid, n, m))
        per_problem[row] = _success_samples(
            matrices[pid].bits.astype(np.int64),
            _aligned_gold(matrices[pid], gold_labels[pid]), n, m, samples, rng)
    acc = per_problem.mean(axis=0)
    lo, hi = np.percentile(acc, [2.5, 97.5])
    return float(acc.mean()), float(lo), float(hi)


def accuracy_with_budgets(matrices: Mapping[str, VerdictMatrix],
                          gold_labels: Mapping[str, Mapping[str, bool]],
                          budgets: Mapping[str, int], seed: int,
                          samples: int = 100, n: int | None = None) -> tuple[float, float, float]:
    """Like best_of_n_accuracy but with a per-problem test count.

    Problem draws are seeded exactly as the scaling grid, so budgets[x] = m
    for all x reproduces the (n, m) grid point bit for bit.
    """
    if not matrices:
        raise ValueError("no matrices given")
    per_problem = np.empty((len(matrices), samples), dtype=np.uint8)
    for row, pid in enumerate(matrices):
        matrix = matrices[pid]
        n_eff = matrix.n_solutions if n is None else n
        b = int(budgets[pid])
        _validate_point({pid: matrix}, n_eff, b)
        rng = np.random.default_rng(subseed(seed, pid, n_eff, b))
        per_problem[row] = _success_samples(
            matrix.bits.astype(np.int64),
            _aligned_gold(matrix, gold_labels[pid]), n_eff, b, samples, rng)
    acc = per_problem.mean(axis=0)
    lo, hi = np.percentile(acc, [2.5, 97.5])
    return float(acc.mean()), float(lo), float(hi)


@dataclass(frozen=True)
class ScalingCurve:
    grid: tuple[tuple[int, int], ...]
    mean_acc: tuple[float, ...]
    ci_low: tuple[float, ...]
    ci_high: tuple[float, ...]
    samples: int
    seed: int

    def rows(self) -> list[tuple[int, int, float, float, float]]:
        return [
            (n, m, self.mean_acc[i], self.ci_low[i], self.ci_high[i])
            for i, (n, m) in enumerate(self.grid)
        ]


def compute_curve(matrices: Mapping[str, VerdictMatrix],
                  gold_labels: Mapping[str, Mapping[str, bool]],
                  grid: Sequence[tuple[int, int]], seed: int, samples: int = 100,
                  method: str = "bootstrap") -> ScalingCurve:
    means, los, his = [], [], []
    for n, m in grid:
        mean, lo, hi = best_of_n_accuracy(matrices, gold_labels, n, m, seed=seed,
                                          samples=samples, method=method)
        means.append(mean)
        los.append(lo)
        his.append(hi)
    return ScalingCurve(grid=tuple((int(n), int(m)) for n, m in grid),
                        mean_acc=tuple(means), ci_low=tuple(los), ci_high=tuple(his),
                        samples=samples, seed=seed)


def pass_at_k(c: int, n: int, k: int) -> float:
    """Unbiased pass@k from n samples with c correct: 1 - C(n-c, k) / C(n, k).

    Computed as a running product so large n never overflows.
    """
    if not 0 <= c <= n:
        raise ValueError(f"need 0 <= c <= n, got c={c}, n={n}")
    if not 1 <= k <= n:
        raise ValueError(f"need 1 <= k <= n, got k={k}, n={n}")
    if n - c < k:
        return 1.0
    prod = 1.0
    for i in range(k):
        prod *= (n - c - i) / (n - i)
    return 1.0 - prod


def problem_pass_rates(matrices: Mapping[str, VerdictMatrix],
                       gold_labels: Mapping[str, Mapping[str, bool]]) -> dict[str, float]:
    """Fraction of each problem's solutions passing the gold suite."""
    rates: dict[str, float] = {}
    for pid, matrix in matrices.items():
        gold = _aligned_gold(matrix, gold_labels[pid])
        if gold.size == 0:
            raise ValueError(f"problem {pid!r}: empty solution pool")
        rates[pid] = float(gold.mean())
    return rates


def difficulty_quintiles(matrices: Mapping[str, VerdictMatrix],
                         gold_labels: Mapping[str, Mapping[str, bool]]) -> list[list[str]]:
    """Partition problems into 5 rank buckets by gold pass rate.

    Problems with no correct solution are dropped first. Bucket 1 holds the
    highest pass rates (easiest); sizes differ by at most one; ties at a
    boundary break by problem_id.
    """
    rates = problem_pass_rates(matrices, gold_labels)
    kept = [(pid, rate) for pid, rate in rates.items() if rate > 0.0]
    if len(kept) < 5:
        raise ValueError(f"only {len(kept)} problems with a correct solution; need at least 5")
    kept.sort(key=lambda item: (-item[1], item[0]))
    chunks = np.array_split(np.arange(len(kept)), 5)
    return [[kept[i][0] for i in chunk] for chunk in chunks]


def curve_report(curve: ScalingCurve, csv_path: str | Path, meta_path: str | Path | None = None,
                 provenance: Mapping[str, object] | None = None,
                 extra_columns: Mapping[str, Sequence[object]] | None = None) -> None:
    """Write plot-ready CSV (n,m,mean,ci_low,ci_high) plus JSON metadata."""
    csv_path = Path(csv_path)
    header = ["n", "m", "mean", "ci_low", "ci_high"]
    extras = dict(extra_columns or {})
    for name, column in extras.items():
        if len(column) != len(curve.grid):
            raise ValueError(f"extra column {name!r} length mismatch")
        header.append(name)
    lines = []
    for key, value in (provenance or {}).items():
        lines.append(f"# {key}={value}")
    lines.append(",".join(header))
    for i, row in enumerate(curve.rows()):
        cells = [str(row[0]), str(row[1]), repr(row[2]), repr(row[3]), repr(row[4])]
        cells.extend(str(extras[name][i]) for name in extras)
        lines.append(",".join(cells))
    csv_path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    if meta_path is not None:
        meta = {"seed": curve.seed, "samples": curve.samples, "grid": [list(g) for g in curve.grid]}
        meta.update(provenance or {})
        Path(meta_path).write_text(json.dumps(meta, sort_keys=True) + "\n", encoding="utf-8")
