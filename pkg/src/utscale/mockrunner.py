"""Scripted runner stub speaking the one-shot runner protocol.

Replays pre-recorded verdicts so orchestration, caching, and scaling
experiments run without any real language harness. Invoked as

    python -S -I <path to this file> <script.json>

(also works as ``python -m utscale.mockrunner``). The script file maps
pair keys to verdicts:

    {"default": "fail", "verdicts": {"<sol>|<test>": "pass", ...}}

The solution key is taken from a ``# mock-id: <key>`` line in the source
code (else the sha256 prefix of the source); the test key is the payload's
"test_id" (else the sha256 prefix of its canonical JSON). Source-code
directives make one entry misbehave on purpose, which the executor tests
use to exercise timeout and protocol-violation handling:

    # mock-sleep: <seconds>     sleep before replying
    # mock-exit: <code>         exit with the given code, no reply
    # mock-garbage              write a non-JSON reply

This file must stay importable with plain stdlib only: it is spawned with
-S -I, where site-packages (and therefore numpy) are unavailable.
"""

import hashlib
import json
import re
import sys
import time


def _digest(text: str) -> str:
    return hashlib.sha256(text.encode("utf-8")).hexdigest()[:16]


def solution_key(source_code: str) -> str:
    match = re.search(r"#\s*mock-id:\s*(\S+)", source_code)
    return match.group(1) if match else _digest(source_code)


def test_key(payload) -> str:
    if isinstance(payload, dict) and payload.get("test_id"):
        return str(payload["test_id"])
    return _digest(json.dumps(payload, sort_keys=True, separators=(",", ":")))


def pair_key(source_code: str, payload) -> str:
    return f"{solution_key(source_code)}|{test_key(payload)}"


def serve_once(stdin=None, stdout=None, argv=None) -> int:
    stdin = stdin or sys.stdin
    stdout = stdout or sys.stdout
    argv = sys.argv[1:] if argv is None else argv
    try:
        request = json.loads(stdin.read())
        source = request["source_code"]
        payload = request["test"]
    except (ValueError, KeyError, TypeError) as exc:
        print(f"mockrunner: malformed request: {exc}", file=sys.stderr)
        return 2

    script = {}
    if argv:
        try:
            with open(argv[0], encoding="utf-8") as fh:
                script = json.load(fh)
        except (OSError, ValueError) as exc:
            print(f"mockrunner: cannot read script {argv[0]!r}: {exc}", file=sys.stderr)
            return 2

    sleep_match = re.search(r"#\s*mock-sleep:\s*([0-9.]+)", source)
    if sleep_match:
        time.sleep(float(sleep_match.group(1)))
    exit_match = re.search(r"#\s*mock-exit:\s*(\d+)", source)
    if exit_match:
        return int(exit_match.group(1))
    if re.search(r"#\s*mock-garbage", source):
        stdout.write("this is not a protocol reply\n")
        return 0

    key = pair_key(source, payload)
    verdict = script.get("verdicts", {}).get(key, script.get("default", "fail"))
    stdout.write(json.dumps({"verdict": verdict, "detail": f"scripted:{key}"}))
    return 0


def command(script_path) -> list[str]:
    """argv for RunnerConfig.command pointing at this file with fast startup."""
    return [sys.executable, "-S", "-I", __file__, str(script_path)]


if __name__ == "__main__":
    sys.exit(serve_once())
