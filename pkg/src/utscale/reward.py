"""Verdict matrices and unit-test majority voting.

A VerdictMatrix holds the N x M binary outcomes of running every candidate
solution against every candidate test; row sums are the per-solution reward,
and the selected candidate is the one passing the most tests (first index on
ties under the default rule).
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np


@dataclass(frozen=True, eq=False)
class VerdictMatrix:
    problem_id: str
    solution_ids: tuple[str, ...]
    test_ids: tuple[str, ...]
    bits: np.ndarray  # shape (N, M), dtype uint8, entries in {0, 1}

    def __eq__(self, other):
        if not isinstance(other, VerdictMatrix):
            return NotImplemented
        return (self.problem_id == other.problem_id
                and self.solution_ids == other.solution_ids
                and self.test_ids == other.test_ids
                and np.array_equal(self.bits, other.bits))

    def __post_init__(self):
        bits = np.asarray(self.bits, dtype=np.uint8)
        if bits.ndim != 2:
            raise ValueError(f"bits must be 2-D, got shape {bits.shape}")
        if bits.shape != (len(self.solution_ids), len(self.test_ids)):
            raise ValueError(
                f"bits shape {bits.shape} inconsistent with "
                f"{len(self.solution_ids)} solutions x {len(self.test_ids)} tests"
            )
        if bits.size and not np.isin(bits, (0, 1)).all():
            raise ValueError("bits entries must be 0 or 1")
        bits.setflags(write=False)
        object.__setattr__(self, "bits", bits)

    @property
    def n_solutions(self) -> int:
        return len(self.solution_ids)

    @property
    def n_tests(self) -> int:
        return len(self.test_ids)

    def to_json(self) -> dict:
        return {
            "problem_id": self.problem_id,
            "solution_ids": list(self.solution_ids),
            "test_ids": list(self.test_ids),
            "bits": self.bits.tolist(),
        }

    @classmethod
    def from_json(cls, obj: dict) -> "VerdictMatrix":
        return cls(
            problem_id=obj["problem_id"],
            solution_ids=tuple(obj["solution_ids"]),
            test_ids=tuple(obj["test_ids"]),
            bits=np.array(obj["bits"], dtype=np.uint8).reshape(
                len(obj["solution_ids"]), len(obj["test_ids"])
            ),
        )

    def save(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.to_json(), sort_keys=True) + "\n", encoding="utf-8")

    @classmethod
    def load(cls, path: str | Path) -> "VerdictMatrix":
        return cls.from_json(json.loads(Path(path).read_text(encoding="utf-8")))


@dataclass(frozen=True)
class SelectionResult:
    chosen_index: int
    vote_counts: tuple[int, ...]
    tie_set: tuple[int, ...]
    tie_broken: bool
    tie_rule: str = "lowest_index"

    @property
    def chosen_votes(self) -> int:
        return self.vote_counts[self.chosen_index]


def vote_counts(matrix: VerdictMatrix) -> list[int]:
    """Row sums of the verdict bits (tests passed per solution)."""
    if matrix.n_solutions == 0:
        raise ValueError("empty matrix: no solutions")
    return matrix.bits.sum(axis=1, dtype=np.int64).tolist()


def select_best(matrix: VerdictMatrix, tie_rule: str = "lowest_index",
                seed: int | None = None) -> SelectionResult:
    """Pick the solution passing the most tests.

    tie_rule "lowest_index" takes the first maximizer (deterministic);
    "random" draws uniformly from the tie set using the given seed.
    """
    counts = vote_counts(matrix)
    best = max(counts)
    tie_set = tuple(i for i, c in enumerate(counts) if c == best)
    if tie_rule == "lowest_index":
        chosen = tie_set[0]
    elif tie_rule == "random":
        if seed is None:
            raise ValueError("tie_rule='random' requires a seed")
        rng = np.random.default_rng(seed)
        chosen = int(tie_set[rng.integers(len(tie_set))])
    else:
        raise ValueError(f"unknown tie_rule {tie_rule!r}")
    return SelectionResult(
        chosen_index=chosen,
        vote_counts=tuple(counts),
        tie_set=tie_set,
        tie_broken=len(tie_set) > 1,
        tie_rule=tie_rule,
    )


def subselect(matrix: VerdictMatrix, solution_idx: Sequence[int],
              test_idx: Sequence[int]) -> VerdictMatrix:
    """Restrict / reindex to the given rows and columns, repeats allowed.

    Bootstrap draws with replacement are expressed as repeated indices.
    """
    rows = np.asarray(solution_idx, dtype=np.intp)
    cols = np.asarray(test_idx, dtype=np.intp)
    n, m = matrix.n_solutions, matrix.n_tests
    if rows.size and (rows.min() < 0 or rows.max() >= n):
        raise IndexError(f"solution index out of range 0..{n - 1}")
    if cols.size and (cols.min() < 0 or cols.max() >= m):
        raise IndexError(f"test index out of range 0..{m - 1}")
    return VerdictMatrix(
        problem_id=matrix.problem_id,
        solution_ids=tuple(matrix.solution_ids[i] for i in rows),
        test_ids=tuple(matrix.test_ids[j] for j in cols),
        bits=matrix.bits[np.ix_(rows, cols)] if rows.size and cols.size
        else np.zeros((rows.size, cols.size), dtype=np.uint8),
    )
