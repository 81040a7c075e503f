"""Orchestrate sandboxed (solution, test) executions through runner subprocesses.

Runner protocol (language-agnostic, one-shot):

  * the orchestrator spawns ``cfg.command`` with a fresh scratch directory as
    its working directory and writes one JSON request to its stdin:
        {"entry_point": str, "source_code": str, "test": <test payload>,
         "timeout_s": num}
    plus the optional extensions "memory_cap_bytes" and "float_rel_tol";
  * the runner writes one JSON reply to stdout and exits 0:
        {"verdict": "pass" | "fail" | "error", "detail": str}
  * any other exit code or a malformed reply scores verdict="error" for that
    entry; missing the orchestrator deadline scores "timeout" (child killed).

Every (solution, test) cell gets exactly one verdict; individual runner
failures degrade that cell, never the run. Verdict "pass" maps to bit 1,
everything else to 0. Results are cached by content hash of
(entry_point, source_code, test payload, timeout), in memory and optionally
on disk, so re-running an experiment is free.
"""

from __future__ import annotations

import hashlib
import json
import os
import shutil
import subprocess
import tempfile
import threading
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from .corpus import Corpus, SolutionRecord, TestSpec
from .reward import VerdictMatrix

VERDICTS = ("pass", "fail", "error", "timeout")
DEFAULT_TIMEOUT_S = 10.0
DEFAULT_OUTPUT_CAP = 16 * 1024


class RunnerNotFound(RuntimeError):
    """The configured runner command does not resolve to an executable."""


@dataclass(frozen=True)
class RunnerConfig:
    command: tuple[str, ...]
    timeout: float = DEFAULT_TIMEOUT_S
    memory_cap: int | None = None
    workers: int = 4
    output_cap: int = DEFAULT_OUTPUT_CAP
    use_cache: bool = True
    cache_dir: str | None = None
    float_rel_tol: float | None = None

    def __post_init__(self):
        if not self.command:
            raise ValueError("runner command must not be empty")
        if self.timeout <= 0:
            raise ValueError("timeout must be positive")
        if self.workers < 1:
            raise ValueError("workers must be >= 1")
        object.__setattr__(self, "command", tuple(self.command))


@dataclass(frozen=True)
class ExecTask:
    """One (solution, test) execution unit with its self-contained request."""

    problem_id: str
    solution_id: str
    test_id: str
    request: dict

    @classmethod
    def build(cls, problem_id: str, solution: SolutionRecord, test: TestSpec,
              entry_point: str, cfg: RunnerConfig) -> "ExecTask":
        return cls(
            problem_id=problem_id,
            solution_id=solution.solution_id,
            test_id=test.test_id,
            request=_build_request(entry_point, solution.source_code, test, cfg),
        )


@dataclass(frozen=True)
class ExecOutcome:
    problem_id: str
    solution_id: str
    test_id: str
    verdict: str
    wall_time: float
    detail: str = ""
    cached: bool = False

    @property
    def bit(self) -> int:
        return 1 if self.verdict == "pass" else 0

    def to_json(self) -> dict:
        return {
            "problem_id": self.problem_id,
            "solution_id": self.solution_id,
            "test_id": self.test_id,
            "verdict": self.verdict,
            "wall_time": self.wall_time,
            "detail": self.detail,
            "cached": self.cached,
        }


@dataclass
class MatrixRun:
    matrix: VerdictMatrix
    outcomes: list[ExecOutcome]


@dataclass
class GoldRun:
    problem_id: str
    passed: dict[str, bool]
    labeled: tuple[SolutionRecord, ...]
    outcomes: list[ExecOutcome]

    def results(self) -> list[tuple[str, bool]]:
        return list(self.passed.items())


class _Cache:
    """Process-wide verdict cache with an optional on-disk mirror."""

    def __init__(self, cache_dir: str | None):
        self._mem: dict[str, dict] = {}
        self._lock = threading.Lock()
        self._dir = Path(cache_dir) if cache_dir else None
        if self._dir is not None:
            self._dir.mkdir(parents=True, exist_ok=True)

    def _path(self, key: str) -> Path:
        assert self._dir is not None
        return self._dir / key[:2] / f"{key}.json"

    def get(self, key: str) -> dict | None:
        with self._lock:
            if key in self._mem:
                return self._mem[key]
        if self._dir is not None:
            path = self._path(key)
            if path.exists():
                try:
                    value = json.loads(path.read_text(encoding="utf-8"))
                except (OSError, json.JSONDecodeError):
                    return None
                with self._lock:
                    self._mem[key] = value
                return value
        return None

    def put(self, key: str, value: dict) -> None:
        with self._lock:
            self._mem[key] = value
        if self._dir is not None:
            path = self._path(key)
            path.parent.mkdir(parents=True, exist_ok=True)
            tmp = path.with_suffix(f".tmp{os.getpid()}.{threading.get_ident()}")
            tmp.write_text(json.dumps(value, sort_keys=True), encoding="utf-8")
            os.replace(tmp, path)


def _cache_key(request: dict) -> str:
    keyed = {k: request[k] for k in ("entry_point", "source_code", "test", "timeout_s")}
    blob = json.dumps(keyed, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode("utf-8")).hexdigest()


def check_runner(cfg: RunnerConfig) -> None:
    """Raise RunnerNotFound unless cfg.command[0] resolves to an executable."""
    prog = cfg.command[0]
    if shutil.which(prog) is None and not (os.path.isfile(prog) and os.access(prog, os.X_OK)):
        raise RunnerNotFound(f"runner executable not found: {prog!r}")


def _build_request(entry_point: str, source_code: str, test: TestSpec, cfg: RunnerConfig) -> dict:
    request = {
        "entry_point": entry_point,
        "source_code": source_code,
        "test": test.payload(),
        "timeout_s": cfg.timeout,
    }
    if cfg.memory_cap is not None:
        request["memory_cap_bytes"] = cfg.memory_cap
    if cfg.float_rel_tol is not None:
        request["float_rel_tol"] = cfg.float_rel_tol
    return request


def _truncate(text: str, cap: int) -> str:
    data = text.encode("utf-8", errors="replace")
    if len(data) <= cap:
        return text
    return data[:cap].decode("utf-8", errors="replace") + "...[truncated]"


def _spawn_once(cfg: RunnerConfig, request: dict) -> tuple[str, float, str]:
    """Run one protocol exchange; returns (verdict, wall_time, detail)."""
    # grace on top of the in-request budget so a compliant runner can finish
    # and report; the hard deadline still reaps runaways
    deadline = cfg.timeout + 0.5 + 0.1 * cfg.timeout
    scratch = tempfile.mkdtemp(prefix="utscale-task-")
    start = time.monotonic()
    try:
        try:
            proc = subprocess.Popen(
                list(cfg.command),
                stdin=subprocess.PIPE,
                stdout=subprocess.PIPE,
                stderr=subprocess.PIPE,
                cwd=scratch,
                text=True,
            )
        except FileNotFoundError:
            return "error", time.monotonic() - start, f"runner not found: {cfg.command[0]!r}"
        try:
            out, err = proc.communicate(json.dumps(request), timeout=deadline)
        except subprocess.TimeoutExpired:
            proc.kill()
            proc.communicate()
            return "timeout", time.monotonic() - start, f"killed after {deadline:.1f}s"
        wall = time.monotonic() - start
        detail_suffix = _truncate(err.strip(), cfg.output_cap) if err.strip() else ""
        if proc.returncode != 0:
            return "error", wall, _truncate(
                f"runner exited {proc.returncode}: {detail_suffix}", cfg.output_cap)
        try:
            reply = json.loads(out)
            verdict = reply["verdict"]
            detail = str(reply.get("detail", ""))
        except (json.JSONDecodeError, TypeError, KeyError):
            return "error", wall, _truncate(f"malformed runner reply: {out[:200]!r}", cfg.output_cap)
        if verdict not in ("pass", "fail", "error"):
            return "error", wall, f"illegal verdict {verdict!r}"
        return verdict, wall, _truncate(detail, cfg.output_cap)
    finally:
        shutil.rmtree(scratch, ignore_errors=True)


def _execute(cfg: RunnerConfig, cache: _Cache | None, task: ExecTask) -> ExecOutcome:
    key = _cache_key(task.request)
    if cache is not None:
        hit = cache.get(key)
        if hit is not None:
            return ExecOutcome(task.problem_id, task.solution_id, task.test_id,
                               hit["verdict"], hit["wall_time"], hit["detail"], cached=True)
    verdict, wall, detail = _spawn_once(cfg, task.request)
    if cache is not None:
        cache.put(key, {"verdict": verdict, "wall_time": wall, "detail": detail})
    return ExecOutcome(task.problem_id, task.solution_id, task.test_id, verdict, wall, detail)


_caches: dict[str | None, _Cache] = {}
_caches_lock = threading.Lock()


def _cache_for(cfg: RunnerConfig) -> _Cache | None:
    if not cfg.use_cache:
        return None
    with _caches_lock:
        if cfg.cache_dir not in _caches:
            _caches[cfg.cache_dir] = _Cache(cfg.cache_dir)
        return _caches[cfg.cache_dir]


def run_matrix(corpus: Corpus, problem_id: str, cfg: RunnerConfig) -> MatrixRun:
    """Execute every (solution, test) pair of one problem into an N x M matrix.

    The matrix is identical for any worker count: cells are filled by index,
    not completion order.
    """
    problem = corpus.problems[problem_id]
    solutions = corpus.solution_pool(problem_id)
    tests = corpus.test_pool(problem_id)
    if not solutions or not tests:
        raise ValueError(f"problem {problem_id!r} needs non-empty solution and test pools")
    check_runner(cfg)
    cache = _cache_for(cfg)

    tasks = [
        (i, j, ExecTask.build(problem_id, solution, test, problem.entry_point, cfg))
        for i, solution in enumerate(solutions)
        for j, test in enumerate(tests)
    ]
    bits = np.zeros((len(solutions), len(tests)), dtype=np.uint8)
    outcomes: list[ExecOutcome | None] = [None] * len(tasks)

    def work(pos: int) -> None:
        i, j, task = tasks[pos]
        outcome = _execute(cfg, cache, task)
        outcomes[pos] = outcome
        bits[i, j] = outcome.bit

    with ThreadPoolExecutor(max_workers=cfg.workers) as pool:
        list(pool.map(work, range(len(tasks))))

    matrix = VerdictMatrix(
        problem_id=problem_id,
        solution_ids=tuple(s.solution_id for s in solutions),
        test_ids=tuple(t.test_id for t in tests),
        bits=bits,
    )
    return MatrixRun(matrix=matrix, outcomes=[o for o in outcomes if o is not None])


def run_gold(corpus: Corpus, problem_id: str, cfg: RunnerConfig) -> GoldRun:
    """Score every solution against the gold suite (pass = passes every gold test)."""
    problem = corpus.problems[problem_id]
    solutions = corpus.solution_pool(problem_id)
    if not problem.gold_tests:
        raise ValueError(f"problem {problem_id!r} has no gold tests")
    check_runner(cfg)
    cache = _cache_for(cfg)

    tasks = [
        (i, g, ExecTask.build(problem_id, solution, test, problem.entry_point, cfg))
        for i, solution in enumerate(solutions)
        for g, test in enumerate(problem.gold_tests)
    ]
    outcomes: list[ExecOutcome | None] = [None] * len(tasks)
    passed_bits = np.ones((len(solutions), len(problem.gold_tests)), dtype=bool)

    def work(pos: int) -> None:
        i, g, task = tasks[pos]
        outcome = _execute(cfg, cache, task)
        outcomes[pos] = outcome
        passed_bits[i, g] = outcome.bit == 1

    with ThreadPoolExecutor(max_workers=cfg.workers) as pool:
        list(pool.map(work, range(len(tasks))))

    passed = {
        solution.solution_id: bool(passed_bits[i].all())
        for i, solution in enumerate(solutions)
    }
    labeled = tuple(
        replace(s, label="correct" if passed[s.solution_id] else "incorrect")
        for s in solutions
    )
    return GoldRun(problem_id=problem_id, passed=passed, labeled=labeled,
                   outcomes=[o for o in outcomes if o is not None])
