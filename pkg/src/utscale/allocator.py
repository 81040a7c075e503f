"""Dynamic allocation of a global unit-test budget across problems.

The value of giving b budget units to a problem with pass rate lam is
q(lam, b) = 1 - (1 - lam)^b, the chance that at least one of b independent
attempts succeeds. Marginal gains lam * (1 - lam)^b shrink as b grows, so
granting one unit at a time to the current best marginal gain maximizes the
total value for any budget.
"""

from __future__ import annotations

import heapq
import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Mapping

STRATEGIES = ("greedy_predicted", "greedy_gold", "equal")


def _check_lambda(lam: float) -> float:
    lam = float(lam)
    if not 0.0 <= lam <= 1.0 or math.isnan(lam):
        raise ValueError(f"pass rate must lie in [0, 1], got {lam}")
    return lam


def _pow_one_minus(lam: float, b: int) -> float:
    # (1 - lam)^b via exp(b * log1p(-lam)); exact for the lam edge cases
    if lam == 0.0:
        return 1.0
    if lam == 1.0:
        return 0.0 if b > 0 else 1.0
    return math.exp(b * math.log1p(-lam))


def q(lam: float, b: int) -> float:
    """Probability of at least one success in b attempts at rate lam."""
    lam = _check_lambda(lam)
    if b < 0:
        raise ValueError("budget must be non-negative")
    if b == 0:
        return 0.0
    return -math.expm1(b * math.log1p(-lam)) if 0.0 < lam < 1.0 else (0.0 if lam == 0.0 else 1.0)


def marginal_gain(lam: float, b: int) -> float:
    """q(lam, b + 1) - q(lam, b) = lam * (1 - lam)^b."""
    lam = _check_lambda(lam)
    return lam * _pow_one_minus(lam, b)


@dataclass(frozen=True)
class AllocationPlan:
    strategy: str
    total: int
    budgets: dict[str, int]
    lambdas_used: dict[str, float]

    def total_reward(self) -> float:
        return sum(q(self.lambdas_used.get(pid, 0.0), b) for pid, b in self.budgets.items())

    def to_json(self) -> dict:
        return {
            "strategy": self.strategy,
            "total": self.total,
            "budgets": dict(self.budgets),
            "lambdas_used": dict(self.lambdas_used),
        }

    def save(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.to_json(), sort_keys=True) + "\n", encoding="utf-8")


def greedy_allocate(lambdas: Mapping[str, float], budget: int,
                    strategy: str = "greedy_gold") -> AllocationPlan:
    """Grant budget units one at a time to the largest marginal gain.

    Ties break toward the problem listed first in `lambdas` (round-robin
    among equal rates). The returned budgets maximize the summed q values
    subject to the total budget.
    """
    if budget < 0:
        raise ValueError("budget must be non-negative")
    pids = list(lambdas)
    if not pids and budget > 0:
        raise ValueError("cannot allocate a positive budget to zero problems")
    lams = {pid: _check_lambda(lambdas[pid]) for pid in pids}
    budgets = {pid: 0 for pid in pids}
    # heap entries: (-gain, insertion order, pid); heapq pops the largest gain,
    # then the earliest-listed problem
    heap = [(-marginal_gain(lams[pid], 0), order, pid) for order, pid in enumerate(pids)]
    heapq.heapify(heap)
    for _ in range(budget):
        neg_gain, order, pid = heapq.heappop(heap)
        budgets[pid] += 1
        heapq.heappush(heap, (-marginal_gain(lams[pid], budgets[pid]), order, pid))
    return AllocationPlan(strategy=strategy, total=budget, budgets=budgets, lambdas_used=lams)


def equal_allocate(problem_ids: Iterable[str], budget: int,
                   lambdas: Mapping[str, float] | None = None) -> AllocationPlan:
    """floor(B / P) units each, remainder going to the earliest-listed ids."""
    if budget < 0:
        raise ValueError("budget must be non-negative")
    pids = list(problem_ids)
    if not pids and budget > 0:
        raise ValueError("cannot allocate a positive budget to zero problems")
    base, extra = divmod(budget, len(pids)) if pids else (0, 0)
    budgets = {pid: base + (1 if i < extra else 0) for i, pid in enumerate(pids)}
    return AllocationPlan(
        strategy="equal",
        total=budget,
        budgets=budgets,
        lambdas_used={pid: float(lambdas[pid]) for pid in pids} if lambdas is not None else {},
    )


def evaluate_allocation(plan: AllocationPlan, matrices, gold_labels, seed: int,
                        samples: int = 100, n: int | None = None):
    """Bootstrap best-of-n accuracy when problem x gets plan.budgets[x] tests.

    Thin wrapper over the scaling machinery so that a plan giving every
    problem m tests scores identically to the (n, m) scaling grid point.
    """
    from . import scaling

    missing = [pid for pid in matrices if pid not in plan.budgets]
    if missing:
        raise ValueError(f"plan lacks budgets for problems: {missing[:5]}")
    budgets = {pid: plan.budgets[pid] for pid in matrices}
    return scaling.accuracy_with_budgets(matrices, gold_labels, budgets, seed=seed,
                                         samples=samples, n=n)
