"""Data model and ingestion of problem / solution / test pools.

Records live in line-delimited JSON files (one record per line, UTF-8):

    problems.jsonl   {"problem_id", "prompt", "entry_point", "gold_tests",
                      "feature_vector"?, "gold_pass_rate"?}
    solutions.jsonl  {"problem_id", "solution_id", "source_code", "label"?}
    tests.jsonl      {"problem_id", "test_id", "kind", "cases"?, "code"?,
                      "label"?}

Pool order is file order: the i-th solution / j-th test of a problem is the
i-th / j-th record carrying that problem_id. A loaded Corpus is immutable by
convention and safe to share across threads.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Iterable, Iterator

SOLUTION_LABELS = ("correct", "incorrect", "unknown")
TEST_LABELS = ("valid", "invalid", "unknown")
TEST_KINDS = ("structured", "code_block")


class CorpusError(ValueError):
    """Raised on unparseable or inconsistent record files."""

    def __init__(self, message: str, path: str | None = None, line: int | None = None):
        loc = ""
        if path is not None:
            loc = f"{path}:{line}: " if line is not None else f"{path}: "
        super().__init__(f"{loc}{message}")
        self.path = path
        self.line = line


@dataclass(frozen=True)
class TestCase:
    input_args: list
    expected_output: Any


@dataclass(frozen=True)
class TestSpec:
    """One candidate or gold unit test.

    Exactly one payload is populated: ``cases`` for kind="structured"
    (call the entry point on input_args, compare with expected_output),
    ``code`` for kind="code_block" (an assertion program run in the
    candidate's namespace).
    """

    problem_id: str
    test_id: str
    kind: str
    cases: tuple[TestCase, ...] = ()
    code: str = ""
    label: str = "unknown"

    def payload(self) -> dict:
        """Self-contained dict form used in runner-protocol requests."""
        out: dict[str, Any] = {"test_id": self.test_id, "kind": self.kind}
        if self.kind == "structured":
            out["cases"] = [
                {"input_args": list(c.input_args), "expected_output": c.expected_output}
                for c in self.cases
            ]
        else:
            out["code"] = self.code
        return out

    def to_json(self) -> dict:
        out = {"problem_id": self.problem_id, **self.payload()}
        out["label"] = None if self.label == "unknown" else self.label
        return out


@dataclass(frozen=True)
class ProblemRecord:
    problem_id: str
    prompt: str
    entry_point: str
    gold_tests: tuple[TestSpec, ...] = ()
    feature_vector: tuple[float, ...] | None = None
    gold_pass_rate: float | None = None

    def to_json(self) -> dict:
        out: dict[str, Any] = {
            "problem_id": self.problem_id,
            "prompt": self.prompt,
            "entry_point": self.entry_point,
            "gold_tests": [t.to_json() for t in self.gold_tests],
        }
        if self.feature_vector is not None:
            out["feature_vector"] = list(self.feature_vector)
        if self.gold_pass_rate is not None:
            out["gold_pass_rate"] = self.gold_pass_rate
        return out


@dataclass(frozen=True)
class SolutionRecord:
    problem_id: str
    solution_id: str
    source_code: str
    label: str = "unknown"

    def to_json(self) -> dict:
        return {
            "problem_id": self.problem_id,
            "solution_id": self.solution_id,
            "source_code": self.source_code,
            "label": None if self.label == "unknown" else self.label,
        }


@dataclass
class Corpus:
    problems: dict[str, ProblemRecord] = field(default_factory=dict)
    solutions: dict[str, list[SolutionRecord]] = field(default_factory=dict)
    tests: dict[str, list[TestSpec]] = field(default_factory=dict)

    def solution_pool(self, problem_id: str) -> list[SolutionRecord]:
        return self.solutions.get(problem_id, [])

    def test_pool(self, problem_id: str) -> list[TestSpec]:
        return self.tests.get(problem_id, [])

    def problem_ids(self) -> list[str]:
        return list(self.problems)


def _iter_jsonl(path: str | Path) -> Iterator[tuple[int, dict]]:
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            if not raw.strip():
                continue
            try:
                obj = json.loads(raw)
            except json.JSONDecodeError as exc:
                raise CorpusError(f"invalid JSON ({exc.msg})", str(path), lineno) from exc
            if not isinstance(obj, dict):
                raise CorpusError("record is not an object", str(path), lineno)
            yield lineno, obj


def _require(obj: dict, key: str, path: str, line: int) -> Any:
    if key not in obj or obj[key] is None:
        raise CorpusError(f"missing required field {key!r}", path, line)
    return obj[key]


def _parse_label(obj: dict, allowed: tuple[str, ...], path: str, line: int) -> str:
    label = obj.get("label")
    if label is None:
        return "unknown"
    if label not in allowed:
        raise CorpusError(f"label must be one of {allowed[:-1]} or null, got {label!r}", path, line)
    return label


def _parse_test(obj: dict, path: str, line: int, default_problem: str | None = None) -> TestSpec:
    problem_id = obj.get("problem_id") or default_problem
    if not problem_id:
        raise CorpusError("missing required field 'problem_id'", path, line)
    kind = _require(obj, "kind", path, line)
    if kind not in TEST_KINDS:
        raise CorpusError(f"kind must be one of {TEST_KINDS}, got {kind!r}", path, line)
    cases: list[TestCase] = []
    for case in obj.get("cases") or []:
        if not isinstance(case, dict) or "input_args" not in case or "expected_output" not in case:
            raise CorpusError("case needs input_args and expected_output", path, line)
        if not isinstance(case["input_args"], list):
            raise CorpusError("input_args must be a list", path, line)
        cases.append(TestCase(case["input_args"], case["expected_output"]))
    return TestSpec(
        problem_id=problem_id,
        test_id=str(_require(obj, "test_id", path, line)),
        kind=kind,
        cases=tuple(cases),
        code=obj.get("code") or "",
        label=_parse_label(obj, TEST_LABELS, path, line),
    )


def load_corpus(problem_path: str | Path, solution_path: str | Path, test_path: str | Path) -> Corpus:
    """Load and cross-reference the three record files.

    Raises CorpusError (with file and line) on parse errors, duplicate ids,
    or solutions/tests referencing an unknown problem_id.
    """
    corpus = Corpus()

    for lineno, obj in _iter_jsonl(problem_path):
        pid = str(_require(obj, "problem_id", str(problem_path), lineno))
        if pid in corpus.problems:
            raise CorpusError(f"duplicate problem_id {pid!r}", str(problem_path), lineno)
        gold = tuple(
            _parse_test(t, str(problem_path), lineno, default_problem=pid)
            for t in obj.get("gold_tests") or []
        )
        fv = obj.get("feature_vector")
        corpus.problems[pid] = ProblemRecord(
            problem_id=pid,
            prompt=str(_require(obj, "prompt", str(problem_path), lineno)),
            entry_point=str(_require(obj, "entry_point", str(problem_path), lineno)),
            gold_tests=gold,
            feature_vector=tuple(float(v) for v in fv) if fv is not None else None,
            gold_pass_rate=float(obj["gold_pass_rate"]) if obj.get("gold_pass_rate") is not None else None,
        )
        corpus.solutions[pid] = []
        corpus.tests[pid] = []

    seen_solutions: set[tuple[str, str]] = set()
    for lineno, obj in _iter_jsonl(solution_path):
        rec = SolutionRecord(
            problem_id=str(_require(obj, "problem_id", str(solution_path), lineno)),
            solution_id=str(_require(obj, "solution_id", str(solution_path), lineno)),
            source_code=str(_require(obj, "source_code", str(solution_path), lineno)),
            label=_parse_label(obj, SOLUTION_LABELS, str(solution_path), lineno),
        )
        if rec.problem_id not in corpus.problems:
            raise CorpusError(
                f"solution {rec.solution_id!r} references unknown problem_id {rec.problem_id!r}",
                str(solution_path), lineno,
            )
        key = (rec.problem_id, rec.solution_id)
        if key in seen_solutions:
            raise CorpusError(f"duplicate solution_id {rec.solution_id!r} for {rec.problem_id!r}",
                              str(solution_path), lineno)
        seen_solutions.add(key)
        corpus.solutions[rec.problem_id].append(rec)

    seen_tests: set[tuple[str, str]] = set()
    for lineno, obj in _iter_jsonl(test_path):
        spec = _parse_test(obj, str(test_path), lineno)
        if spec.problem_id not in corpus.problems:
            raise CorpusError(
                f"test {spec.test_id!r} references unknown problem_id {spec.problem_id!r}",
                str(test_path), lineno,
            )
        key = (spec.problem_id, spec.test_id)
        if key in seen_tests:
            raise CorpusError(f"duplicate test_id {spec.test_id!r} for {spec.problem_id!r}",
                              str(test_path), lineno)
        seen_tests.add(key)
        corpus.tests[spec.problem_id].append(spec)

    return corpus


def _check_test(spec: TestSpec, where: str, out: list[str]) -> None:
    has_cases = len(spec.cases) > 0
    has_code = bool(spec.code)
    if spec.kind == "structured" and not has_cases:
        out.append(f"{where}: structured test {spec.test_id!r} has no cases")
    if spec.kind == "code_block" and not has_code:
        out.append(f"{where}: code_block test {spec.test_id!r} has empty code")
    if has_cases and has_code:
        out.append(f"{where}: test {spec.test_id!r} has both cases and code payloads")
    if not has_cases and not has_code:
        out.append(f"{where}: test {spec.test_id!r} has no payload")


def validate_corpus(corpus: Corpus, eval_mode: bool = False) -> list[str]:
    """Return all invariant violations as diagnostic strings (empty iff valid).

    eval_mode additionally requires a non-empty gold suite per problem.
    """
    diags: list[str] = []
    for pid, problem in corpus.problems.items():
        if not problem.entry_point:
            diags.append(f"problem {pid!r}: empty entry_point")
        if eval_mode and not problem.gold_tests:
            diags.append(f"problem {pid!r}: gold_tests empty but required for evaluation")
        for spec in problem.gold_tests:
            _check_test(spec, f"problem {pid!r} gold", diags)
    for pid, pool in corpus.solutions.items():
        if pid not in corpus.problems:
            diags.append(f"solution pool references unknown problem {pid!r}")
        for rec in pool:
            if not rec.source_code.strip():
                diags.append(f"solution {rec.solution_id!r} of {pid!r}: empty source_code")
    for pid, pool in corpus.tests.items():
        if pid not in corpus.problems:
            diags.append(f"test pool references unknown problem {pid!r}")
        for spec in pool:
            _check_test(spec, f"problem {pid!r}", diags)
    return diags


def write_jsonl(path: str | Path, records: Iterable[dict]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for rec in records:
            fh.write(json.dumps(rec, sort_keys=True) + "\n")


def write_corpus(corpus: Corpus, problem_path: str | Path, solution_path: str | Path,
                 test_path: str | Path) -> None:
    """Serialize a corpus back to the three jsonl files (load round-trips)."""
    write_jsonl(problem_path, (p.to_json() for p in corpus.problems.values()))
    write_jsonl(solution_path, (s.to_json() for pid in corpus.problems for s in corpus.solutions[pid]))
    write_jsonl(test_path, (t.to_json() for pid in corpus.problems for t in corpus.tests[pid]))
