"""Synthetic corpus generator for end-to-end runs and statistical checks.

Every problem gets a planted pass rate: a known subset of its solutions is
correct (passes the single gold test), and each candidate test accepts each
solution by an independent coin flip, with acceptance probability 1 - frr
for correct solutions and far for incorrect ones. The generator emits both
the corpus files and the mock-runner script that replays exactly these
verdicts, so the executor pipeline reproduces the planted matrices bit for
bit; in-process callers can skip execution and use the matrices directly.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .corpus import Corpus, ProblemRecord, SolutionRecord, TestCase, TestSpec, write_corpus
from .reward import VerdictMatrix
from .scaling import subseed


@dataclass(frozen=True)
class DemoParams:
    seed: int = 7
    n_problems: int = 71
    n_solutions: int = 5
    n_tests: int = 5
    far: float = 0.3
    frr: float = 0.1
    lambda_levels: tuple[float, ...] = (0.2, 0.4, 0.4, 0.6)
    feature_dim: int = 6
    feature_noise: float = 0.35


@dataclass
class DemoData:
    params: DemoParams
    corpus: Corpus
    script: dict
    matrices: dict[str, VerdictMatrix] = field(default_factory=dict)
    gold_labels: dict[str, dict[str, bool]] = field(default_factory=dict)
    lambdas: dict[str, float] = field(default_factory=dict)


def _solution_source(pid: str, sid: str, variant: int) -> str:
    return (
        f"# mock-id: {pid}_{sid}\n"
        f"def solve(x):\n"
        f"    return x + {variant}\n"
    )


def _features(lam: float, dim: int, noise: float, rng: np.random.Generator) -> tuple[float, ...]:
    logit = math.log(lam / (1.0 - lam)) if 0.0 < lam < 1.0 else (4.0 if lam >= 1.0 else -4.0)
    vec = rng.normal(0.0, 1.0, size=dim)
    vec[0] = logit + rng.normal(0.0, noise)
    return tuple(float(v) for v in vec)


def generate(params: DemoParams = DemoParams()) -> DemoData:
    corpus = Corpus()
    script: dict = {"default": "fail", "verdicts": {}}
    data = DemoData(params=params, corpus=corpus, script=script)

    levels = params.lambda_levels
    for p in range(params.n_problems):
        pid = f"p{p:03d}"
        rng = np.random.default_rng(subseed(params.seed, "demo", pid))
        target = levels[p % len(levels)]
        n_correct = min(max(1, round(target * params.n_solutions)), params.n_solutions)
        lam = n_correct / params.n_solutions
        correct = np.zeros(params.n_solutions, dtype=bool)
        correct[rng.permutation(params.n_solutions)[:n_correct]] = True

        gold = TestSpec(
            problem_id=pid, test_id=f"{pid}_gold", kind="structured",
            cases=(TestCase([p], p + 1),),
        )
        corpus.problems[pid] = ProblemRecord(
            problem_id=pid,
            prompt=f"Synthetic problem {pid}: implement solve(x).",
            entry_point="solve",
            gold_tests=(gold,),
            feature_vector=_features(lam, params.feature_dim, params.feature_noise, rng),
            gold_pass_rate=lam,
        )

        solutions = []
        for s in range(params.n_solutions):
            sid = f"s{s}"
            solutions.append(SolutionRecord(
                problem_id=pid, solution_id=sid,
                source_code=_solution_source(pid, sid, s),
            ))
            script["verdicts"][f"{pid}_{sid}|{pid}_gold"] = "pass" if correct[s] else "fail"
        corpus.solutions[pid] = solutions

        tests = []
        bits = np.zeros((params.n_solutions, params.n_tests), dtype=np.uint8)
        for t in range(params.n_tests):
            tid = f"{pid}_t{t:02d}"
            tests.append(TestSpec(
                problem_id=pid, test_id=tid, kind="structured",
                cases=(TestCase([t], t + 1),),
            ))
            for s in range(params.n_solutions):
                accept_p = (1.0 - params.frr) if correct[s] else params.far
                bit = int(rng.random() < accept_p)
                bits[s, t] = bit
                script["verdicts"][f"{pid}_s{s}|{tid}"] = "pass" if bit else "fail"
        corpus.tests[pid] = tests

        data.matrices[pid] = VerdictMatrix(
            problem_id=pid,
            solution_ids=tuple(s.solution_id for s in solutions),
            test_ids=tuple(t.test_id for t in tests),
            bits=bits,
        )
        data.gold_labels[pid] = {
            s.solution_id: bool(correct[i]) for i, s in enumerate(solutions)
        }
        data.lambdas[pid] = lam
    return data


def write_inputs(data: DemoData, directory: str | Path) -> dict[str, Path]:
    """Write corpus jsonl files and the mock-runner script; returns the paths."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    paths = {
        "problems": directory / "problems.jsonl",
        "solutions": directory / "solutions.jsonl",
        "tests": directory / "tests.jsonl",
        "mock_script": directory / "mock_script.json",
    }
    write_corpus(data.corpus, paths["problems"], paths["solutions"], paths["tests"])
    paths["mock_script"].write_text(
        json.dumps(data.script, sort_keys=True) + "\n", encoding="utf-8")
    return paths
