"""One-shot Python runner for the utscale runner protocol.

Reads one JSON request from stdin:

    {"entry_point": str, "source_code": str, "test": <payload>,
     "timeout_s": num, "memory_cap_bytes": int?, "float_rel_tol": num?,
     "float_abs_tol": num?}

executes the candidate source in a fresh module namespace, runs the test
payload against it, and writes one JSON reply to stdout before exiting 0:

    {"verdict": "pass" | "fail" | "error", "detail": str}

Structured tests call the entry point on each case's input_args and compare
the result to expected_output by deep structural equality (floats compared
with relative tolerance 1e-6 and absolute floor 1e-12 by default, both
overridable per request). Code-block tests run an assertion program inside
the candidate's namespace: a clean exit is a pass, AssertionError is a fail,
anything else is an error. Wall-clock enforcement is the orchestrator's job;
this process only applies cheap self-limits (recursion cap, best-effort
address-space cap) so runaway candidates die faster.

The module is dependency-free on purpose: it can be spawned either as
``python -m pyharness`` or directly as ``python -S -I <this file>`` for
faster interpreter startup.
"""

import io
import json
import sys
import traceback

DEFAULT_REL_TOL = 1e-6
DEFAULT_ABS_TOL = 1e-12
RECURSION_LIMIT = 10_000
DETAIL_CAP = 16 * 1024


def _set_self_limits(memory_cap_bytes):
    sys.setrecursionlimit(RECURSION_LIMIT)
    if memory_cap_bytes:
        try:
            import resource

            resource.setrlimit(resource.RLIMIT_AS, (memory_cap_bytes, memory_cap_bytes))
        except (ImportError, ValueError, OSError):
            pass  # best effort only


def _numbers_close(a, b, rel_tol, abs_tol) -> bool:
    if isinstance(a, bool) or isinstance(b, bool):
        return a == b
    fa, fb = float(a), float(b)
    if fa == fb:
        return True
    if fa != fa or fb != fb:  # NaN compares equal to NaN, mismatched otherwise
        return fa != fa and fb != fb
    return abs(fa - fb) <= max(rel_tol * max(abs(fa), abs(fb)), abs_tol)


def deep_equal(actual, expected, rel_tol=DEFAULT_REL_TOL, abs_tol=DEFAULT_ABS_TOL) -> bool:
    """Structural equality: sequences match elementwise (list and tuple are
    interchangeable, as JSON only carries lists), dicts match by key, and
    numbers compare within the float tolerance."""
    if isinstance(expected, (int, float)) and not isinstance(expected, bool):
        if isinstance(actual, bool) or not isinstance(actual, (int, float)):
            return False
        return _numbers_close(actual, expected, rel_tol, abs_tol)
    if isinstance(expected, bool):
        return isinstance(actual, bool) and actual == expected
    if isinstance(expected, (list, tuple)):
        if not isinstance(actual, (list, tuple)) or len(actual) != len(expected):
            return False
        return all(deep_equal(a, e, rel_tol, abs_tol) for a, e in zip(actual, expected))
    if isinstance(expected, dict):
        if not isinstance(actual, dict) or set(actual) != set(expected):
            return False
        return all(deep_equal(actual[k], expected[k], rel_tol, abs_tol) for k in expected)
    return actual == expected


def _short(value) -> str:
    text = repr(value)
    return text if len(text) <= 256 else text[:256] + "..."


def _run_structured(entry, cases, rel_tol, abs_tol):
    for k, case in enumerate(cases):
        args = case["input_args"]
        expected = case["expected_output"]
        try:
            actual = entry(*args)
        except Exception:
            return "error", f"case {k}: {traceback.format_exc(limit=3)}"
        if not deep_equal(actual, expected, rel_tol, abs_tol):
            return "fail", (f"case {k}: expected {_short(expected)}, got {_short(actual)}")
    return "pass", f"{len(cases)} case(s) passed"


def _run_code_block(code, namespace):
    try:
        exec(compile(code, "<test>", "exec"), namespace)
    except AssertionError as exc:
        return "fail", f"assertion failed: {exc}" if str(exc) else "assertion failed"
    except Exception:
        return "error", traceback.format_exc(limit=3)
    return "pass", "assertion block completed"


def evaluate(request: dict) -> dict:
    """Execute one request; always returns a protocol reply object."""
    entry_point = request["entry_point"]
    source = request["source_code"]
    test = request["test"]
    rel_tol = float(request.get("float_rel_tol", DEFAULT_REL_TOL))
    abs_tol = float(request.get("float_abs_tol", DEFAULT_ABS_TOL))

    namespace = {"__name__": "__candidate__", "__builtins__": __builtins__}
    try:
        exec(compile(source, "<candidate>", "exec"), namespace)
    except BaseException:
        return {"verdict": "error",
                "detail": f"candidate failed to load: {traceback.format_exc(limit=3)}"}

    kind = test.get("kind")
    if kind == "structured":
        entry = namespace.get(entry_point)
        if not callable(entry):
            return {"verdict": "error",
                    "detail": f"entry point {entry_point!r} not found or not callable"}
        verdict, detail = _run_structured(entry, test.get("cases") or [], rel_tol, abs_tol)
    elif kind == "code_block":
        verdict, detail = _run_code_block(test.get("code") or "", namespace)
    else:
        return {"verdict": "error", "detail": f"unknown test kind {kind!r}"}
    return {"verdict": verdict, "detail": detail[:DETAIL_CAP]}


def serve_once(stdin=None, stdout=None) -> int:
    """Handle exactly one request; candidate stdout is swallowed so the reply
    is the only thing written to the real stream."""
    stdin = stdin if stdin is not None else sys.stdin
    stdout = stdout if stdout is not None else sys.stdout
    try:
        request = json.loads(stdin.read())
        for key in ("entry_point", "source_code", "test"):
            if key not in request:
                raise KeyError(key)
    except (ValueError, KeyError, TypeError) as exc:
        print(f"pyharness: malformed request: {exc!r}", file=sys.stderr)
        return 2

    _set_self_limits(request.get("memory_cap_bytes"))
    captured = io.StringIO()
    real_stdout, sys.stdout = sys.stdout, captured
    try:
        reply = evaluate(request)
    except BaseException:
        reply = {"verdict": "error",
                 "detail": f"harness failure: {traceback.format_exc(limit=3)}"[:DETAIL_CAP]}
    finally:
        sys.stdout = real_stdout
    stdout.write(json.dumps(reply))
    stdout.flush()
    return 0


def command() -> list:
    """argv for RunnerConfig.command with fast stdlib-only startup."""
    return [sys.executable, "-S", "-I", __file__]


if __name__ == "__main__":
    sys.exit(serve_once())
