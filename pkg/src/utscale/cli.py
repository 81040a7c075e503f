"""Command-line entry point wiring corpus, execution, and analysis stages.

Subcommands:

  execute   run every (solution, test) pair and the gold suites; writes
            verdict matrices, an execution log, and gold labels
  select    majority-vote selection per problem from saved matrices
  scale     bootstrap scaling curves over an (n, m) grid, optionally split
            by difficulty quintile
  qc        test validity labels, false-positive filtering, quality metrics
  probe     train the difficulty probe on corpus feature vectors
  allocate  build and score unit-test budget allocation plans
  demo      generate a synthetic corpus and run the whole pipeline on it

A flat JSON config file (--config) supplies defaults for any flag; flags
given on the command line win. Exit codes: 0 success, 1 experiment failure,
2 configuration or environment failure.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import logging
import shlex
import sys
from pathlib import Path

import numpy as np

from . import __version__, allocator, demo as demo_mod, difficulty, executor, mockrunner
from . import quality, report, reward, scaling
from .corpus import Corpus, CorpusError, load_corpus, validate_corpus
from .executor import RunnerConfig, RunnerNotFound
from .reward import VerdictMatrix

log = logging.getLogger("utscale")


class ConfigError(Exception):
    """Bad flags, unreadable inputs, missing upstream artifacts (exit 2)."""


# ---------------------------------------------------------------------------
# shared helpers

_UNHASHED_ARGS = frozenset({
    # identity of the run, not of the experiment: paths move between hosts
    "func", "config", "out", "verbose", "command",
    "problems", "solutions", "tests", "matrices", "gold", "probe_model", "runner_cmd",
})


def _config_hash(args: argparse.Namespace) -> str:
    payload = {k: v for k, v in sorted(vars(args).items()) if k not in _UNHASHED_ARGS}
    blob = json.dumps(payload, sort_keys=True, default=str)
    return hashlib.sha256(blob.encode("utf-8")).hexdigest()[:12]


def _provenance(args: argparse.Namespace) -> dict:
    return {
        "tool": f"utscale/{__version__}",
        "config_hash": _config_hash(args),
        "seed": getattr(args, "seed", None),
    }


def _require_path(value: str | None, what: str) -> Path:
    if not value:
        raise ConfigError(f"missing required {what}")
    path = Path(value)
    if not path.exists():
        raise ConfigError(f"{what} not found: {path}")
    return path


def _out_dir(args: argparse.Namespace) -> Path:
    if not args.out:
        raise ConfigError("missing required --out directory")
    out = Path(args.out)
    for sub in ("reports", "figures"):
        (out / sub).mkdir(parents=True, exist_ok=True)
    return out


def _load_corpus_args(args: argparse.Namespace) -> Corpus:
    corpus = load_corpus(
        _require_path(args.problems, "--problems file"),
        _require_path(args.solutions, "--solutions file"),
        _require_path(args.tests, "--tests file"),
    )
    diags = validate_corpus(corpus)
    if diags:
        raise ConfigError("invalid corpus:\n  " + "\n  ".join(diags))
    return corpus


def _runner_config(args: argparse.Namespace) -> RunnerConfig:
    if not args.runner_cmd:
        raise ConfigError("missing required --runner-cmd")
    return RunnerConfig(
        command=tuple(shlex.split(args.runner_cmd)),
        timeout=args.timeout,
        memory_cap=args.memory_cap,
        workers=args.workers,
        use_cache=not args.no_cache,
        cache_dir=str(Path(args.out) / "cache") if args.out and not args.no_cache else None,
    )


def _load_matrices(matrix_dir: str | None) -> dict[str, VerdictMatrix]:
    directory = _require_path(matrix_dir, "--matrices directory")
    matrices: dict[str, VerdictMatrix] = {}
    for path in sorted(directory.glob("*.json")):
        matrix = VerdictMatrix.load(path)
        matrices[matrix.problem_id] = matrix
    if not matrices:
        raise ConfigError(f"no matrix files in {directory}")
    return matrices


def _load_gold(gold_path: str | None) -> dict[str, dict[str, bool]]:
    path = _require_path(gold_path, "--gold labels file")
    obj = json.loads(path.read_text(encoding="utf-8"))
    return {pid: {sid: bool(v) for sid, v in labels.items()} for pid, labels in obj.items()}


def _gold_lambdas(gold: dict[str, dict[str, bool]]) -> dict[str, float]:
    return {
        pid: difficulty.estimate_lambda(list(labels.values()), pid).lam
        for pid, labels in gold.items()
    }


def _parse_grid(text: str) -> list[tuple[int, int]]:
    grid = []
    for part in text.split(","):
        part = part.strip().lower()
        try:
            n, m = part.split("x")
            grid.append((int(n), int(m)))
        except ValueError:
            raise ConfigError(f"bad grid entry {part!r}; expected like '5x32'") from None
    if not grid:
        raise ConfigError("empty --grid")
    return grid


def _parse_budgets(text: str) -> list[int]:
    try:
        budgets = [int(p) for p in text.split(",") if p.strip()]
    except ValueError:
        raise ConfigError(f"bad --budgets {text!r}; expected like '36,72,144'") from None
    if not budgets or min(budgets) < 0:
        raise ConfigError("budgets must be non-negative integers")
    return budgets


# ---------------------------------------------------------------------------
# subcommands

def cmd_execute(args: argparse.Namespace) -> int:
    corpus = _load_corpus_args(args)
    out = _out_dir(args)
    cfg = _runner_config(args)
    executor.check_runner(cfg)

    (out / "matrices").mkdir(exist_ok=True)
    (out / "executions").mkdir(exist_ok=True)
    gold_labels: dict[str, dict[str, bool]] = {}
    total_cached = total = 0
    for pid in corpus.problem_ids():
        run = executor.run_matrix(corpus, pid, cfg)
        run.matrix.save(out / "matrices" / f"{pid}.json")
        outcomes = list(run.outcomes)
        if corpus.problems[pid].gold_tests and corpus.solution_pool(pid):
            gold_run = executor.run_gold(corpus, pid, cfg)
            gold_labels[pid] = gold_run.passed
            outcomes.extend(gold_run.outcomes)
        with open(out / "executions" / f"{pid}.jsonl", "w", encoding="utf-8") as fh:
            for outcome in outcomes:
                fh.write(json.dumps(outcome.to_json(), sort_keys=True) + "\n")
        total += len(outcomes)
        total_cached += sum(o.cached for o in outcomes)
        log.info("executed %s: %d tasks (%d cached)", pid, len(outcomes), total_cached)

    (out / "gold_labels.json").write_text(
        json.dumps(gold_labels, sort_keys=True, indent=2) + "\n", encoding="utf-8")
    report.write_json(out / "run_meta.json", {
        "problems": len(corpus.problems),
        "tasks": total,
        "cached_tasks": total_cached,
    }, _provenance(args))
    print(f"executed {total} tasks ({total_cached} cached) over {len(corpus.problems)} problems")
    return 0


def cmd_select(args: argparse.Namespace) -> int:
    matrices = _load_matrices(args.matrices)
    gold = _load_gold(args.gold) if args.gold else None
    if args.tie_rule == "random" and args.seed is None:
        raise ConfigError("--tie-rule random requires --seed")
    rows = []
    for pid in sorted(matrices):
        matrix = matrices[pid]
        seed = scaling.subseed(args.seed, pid) if args.tie_rule == "random" else None
        result = reward.select_best(matrix, tie_rule=args.tie_rule, seed=seed)
        chosen_id = matrix.solution_ids[result.chosen_index]
        row = [pid, chosen_id, result.chosen_votes, len(result.tie_set),
               int(result.tie_broken)]
        if gold is not None:
            row.append(int(gold[pid][chosen_id]))
        rows.append(row)
    out = _out_dir(args)
    header = ["problem_id", "chosen_solution_id", "votes", "tie_size", "tie_broken"]
    if gold is not None:
        header.append("passed_gold")
    report.write_csv(out / "reports" / "selection.csv", header, rows, _provenance(args))
    if gold is not None:
        acc = sum(r[-1] for r in rows) / len(rows)
        print(f"selected {len(rows)} problems, accuracy vs gold: {acc:.4f}")
    else:
        print(f"selected {len(rows)} problems")
    return 0


def _scale_curves(matrices, gold, args, prov, out: Path) -> None:
    grid = _parse_grid(args.grid)
    curve = scaling.compute_curve(matrices, gold, grid, seed=args.seed,
                                  samples=args.samples, method=args.method)
    scaling.curve_report(curve, out / "reports" / "scale_curve.csv",
                         out / "reports" / "scale_curve.meta.json", provenance=prov)
    series = {}
    for n in sorted({n for n, _ in grid}):
        pts = [(m, curve.mean_acc[i], curve.ci_low[i], curve.ci_high[i])
               for i, (gn, m) in enumerate(curve.grid) if gn == n]
        pts.sort()
        series[f"n={n}"] = ([p[0] for p in pts], [p[1] for p in pts],
                            [p[2] for p in pts], [p[3] for p in pts])
    report.save_curve_figure(out / "figures" / "scale_curve.png", series)

    if not args.quintiles:
        return
    buckets = scaling.difficulty_quintiles(matrices, gold)
    rows = []
    bucket_means: dict[int, list[float]] = {}
    ms = sorted({m for _, m in grid})
    n_draw = sorted({n for n, _ in grid})[-1]
    for b, pids in enumerate(buckets, start=1):
        sub = {pid: matrices[pid] for pid in pids}
        bucket_curve = scaling.compute_curve(sub, gold, [(n_draw, m) for m in ms],
                                             seed=args.seed, samples=args.samples,
                                             method=args.method)
        bucket_means[b] = list(bucket_curve.mean_acc)
        for (n, m), mean, lo, hi in zip(bucket_curve.grid, bucket_curve.mean_acc,
                                        bucket_curve.ci_low, bucket_curve.ci_high):
            rows.append([b, n, m, repr(mean), repr(lo), repr(hi), len(pids)])
    report.write_csv(out / "reports" / "scale_quintiles.csv",
                     ["bucket", "n", "m", "mean", "ci_low", "ci_high", "problems"],
                     rows, prov)
    report.save_quintile_figure(out / "figures" / "scale_quintiles.png", ms, bucket_means)


def cmd_scale(args: argparse.Namespace) -> int:
    matrices = _load_matrices(args.matrices)
    gold = _load_gold(args.gold)
    out = _out_dir(args)
    _scale_curves(matrices, gold, args, _provenance(args), out)
    print(f"scaling curve over {len(matrices)} problems written to {out / 'reports'}")
    return 0


def _qc_reports(matrices, gold, args, prov, out: Path) -> None:
    quality_rows = []
    label_rows = []
    scatter = []
    ensembles = []
    for pid in sorted(matrices):
        matrix = matrices[pid]
        labels = quality.label_tests(matrix, gold[pid])
        kept = set(quality.filter_false_positive(matrix, gold[pid], policy=args.policy,
                                                 tau=args.tau))
        for tid in matrix.test_ids:
            rep = quality.test_quality(matrix, gold[pid], tid)
            quality_rows.append([pid] + rep.csv_row())
            label_rows.append([pid, tid, labels[tid], int(tid in kept)])
            scatter.append((tid, rep.far, rep.frr))
        ens = quality.ensemble_quality(matrix, gold[pid], rule="strict_majority")
        quality_rows.append([pid] + ens.csv_row())
        ensembles.append((ens.far, ens.frr))
    report.write_csv(out / "reports" / "test_quality.csv",
                     ["problem_id", "scope", "id", "accuracy", "f1", "far", "frr"],
                     quality_rows, prov)
    report.write_csv(out / "reports" / "test_labels.csv",
                     ["problem_id", "test_id", "label", "kept"], label_rows, prov)
    fars = [f for f, _ in ensembles if f is not None]
    frrs = [f for _, f in ensembles if f is not None]
    ens_point = (float(np.mean(fars)) if fars else None,
                 float(np.mean(frrs)) if frrs else None)
    report.save_quality_figure(out / "figures" / "test_quality.png", scatter, ens_point)


def cmd_qc(args: argparse.Namespace) -> int:
    matrices = _load_matrices(args.matrices)
    gold = _load_gold(args.gold)
    out = _out_dir(args)
    _qc_reports(matrices, gold, args, _provenance(args), out)
    print(f"quality report over {len(matrices)} problems written to {out / 'reports'}")
    return 0


def _probe_dataset(corpus: Corpus, gold: dict[str, dict[str, bool]]):
    pids = [pid for pid in sorted(corpus.problems) if pid in gold]
    missing = [pid for pid in pids if corpus.problems[pid].feature_vector is None]
    if missing:
        raise ConfigError(f"problems lack feature_vector: {missing[:5]}")
    if not pids:
        raise ConfigError("no problems with both features and gold labels")
    x = np.array([corpus.problems[pid].feature_vector for pid in pids], dtype=np.float64)
    lam = np.array([difficulty.estimate_lambda(list(gold[pid].values()), pid).lam
                    for pid in pids])
    return pids, x, lam


def _train_probe(corpus, gold, args, prov, out: Path):
    pids, x, lam = _probe_dataset(corpus, gold)
    cfg = difficulty.TrainConfig(
        hidden_dim=args.hidden, learning_rate=args.lr, epochs=args.epochs,
        batch_size=args.batch_size, seed=args.seed, l2=args.l2)
    result = difficulty.train_probe(x, lam, cfg)
    (out / "probe").mkdir(exist_ok=True)
    result.model.save(out / "probe" / "model.json")
    report.write_csv(out / "reports" / "probe_history.csv", ["epoch", "loss"],
                     [[i + 1, repr(v)] for i, v in enumerate(result.history)], prov)
    preds = difficulty.predict_lambda(result.model, x)
    report.write_csv(out / "reports" / "probe_predictions.csv",
                     ["problem_id", "lambda_hat", "lambda_gold"],
                     [[pid, repr(float(p)), repr(float(t))] for pid, p, t in zip(pids, preds, lam)],
                     prov)
    report.save_history_figure(out / "figures" / "probe_history.png", result.history,
                               floor=difficulty.bayes_entropy(lam))
    if result.diverged:
        raise RuntimeError("probe training diverged (non-finite loss); see probe_history.csv")
    return result


def cmd_probe(args: argparse.Namespace) -> int:
    corpus = _problems_only(args.problems)
    gold = _load_gold(args.gold)
    out = _out_dir(args)
    result = _train_probe(corpus, gold, args, _provenance(args), out)
    print(f"probe trained for {args.epochs} epochs, final loss {result.history[-1]:.4f}")
    return 0


def _problems_only(problems_path: str) -> Corpus:
    """Probe training needs problems (features) only; pools may be absent."""
    import tempfile

    with tempfile.TemporaryDirectory() as tmp:
        empty = Path(tmp) / "empty.jsonl"
        empty.write_text("", encoding="utf-8")
        return load_corpus(_require_path(problems_path, "--problems file"), empty, empty)


def _allocation_rows(matrices, gold, lambdas_by_strategy, budgets, args):
    rows = []
    plans = []
    for budget in budgets:
        for strategy in sorted(lambdas_by_strategy):
            lams = lambdas_by_strategy[strategy]
            if strategy == "equal":
                plan = allocator.equal_allocate(list(lams), budget, lams)
            else:
                plan = allocator.greedy_allocate(lams, budget, strategy=strategy)
            mean, lo, hi = allocator.evaluate_allocation(
                plan, matrices, gold, seed=args.seed, samples=args.samples, n=args.n)
            rows.append((strategy, budget, mean, lo, hi))
            plans.append(plan)
    return rows, plans


def cmd_allocate(args: argparse.Namespace) -> int:
    matrices = _load_matrices(args.matrices)
    gold = _load_gold(args.gold)
    out = _out_dir(args)
    budgets = _parse_budgets(args.budgets) if args.budgets else None
    if budgets is None:
        raise ConfigError("missing required --budgets")

    all_gold_lambdas = _gold_lambdas(gold)
    lambdas_gold = {pid: all_gold_lambdas[pid] for pid in matrices}
    strategies: dict[str, dict[str, float]] = {}
    wanted = allocator.STRATEGIES if args.strategy == "all" else (args.strategy,)
    for strategy in wanted:
        if strategy == "greedy_predicted":
            model_path = _require_path(args.probe_model, "--probe-model file")
            model = difficulty.ProbeModel.load(model_path)
            corpus = _problems_only(args.problems)
            preds = {}
            for pid in matrices:
                problem = corpus.problems.get(pid)
                if problem is None or problem.feature_vector is None:
                    raise ConfigError(f"problem {pid!r} lacks a feature_vector for prediction")
                preds[pid] = float(difficulty.predict_lambda(
                    model, np.array(problem.feature_vector)))
            strategies[strategy] = preds
        else:
            strategies[strategy] = dict(lambdas_gold)

    rows, plans = _allocation_rows(matrices, gold, strategies, budgets, args)
    prov = _provenance(args)
    report.write_csv(out / "reports" / "allocation.csv",
                     ["strategy", "B", "mean", "ci_low", "ci_high"],
                     [[s, b, repr(m), repr(lo), repr(hi)] for s, b, m, lo, hi in rows], prov)
    (out / "plans").mkdir(exist_ok=True)
    for plan in plans:
        plan.save(out / "plans" / f"{plan.strategy}_{plan.total}.json")
    report.save_allocation_figure(out / "figures" / "allocation.png", rows)
    print(f"allocation comparison over budgets {budgets} written to {out / 'reports'}")
    return 0


def cmd_demo(args: argparse.Namespace) -> int:
    out = _out_dir(args)
    params = demo_mod.DemoParams(seed=args.seed)
    data = demo_mod.generate(params)
    paths = demo_mod.write_inputs(data, out / "inputs")
    print(f"demo corpus: {params.n_problems} problems x {params.n_solutions} solutions "
          f"x {params.n_tests} tests (seed {params.seed})")

    exec_args = argparse.Namespace(
        problems=str(paths["problems"]), solutions=str(paths["solutions"]),
        tests=str(paths["tests"]), out=str(out),
        runner_cmd=shlex.join(mockrunner.command(paths["mock_script"])),
        workers=args.workers, timeout=args.timeout, memory_cap=None,
        no_cache=args.no_cache, seed=args.seed, func=cmd_execute)
    cmd_execute(exec_args)

    base = dict(matrices=str(out / "matrices"), gold=str(out / "gold_labels.json"),
                out=str(out), seed=args.seed, samples=args.samples)
    cmd_select(argparse.Namespace(**base, tie_rule="lowest_index", func=cmd_select))
    cmd_qc(argparse.Namespace(**base, policy="accepts_all_incorrect", tau=None, func=cmd_qc))

    n = params.n_solutions
    grid = ",".join(f"{n}x{m}" for m in (1, 2, 4, 8, 16, 32))
    cmd_scale(argparse.Namespace(**base, grid=grid, method="bootstrap", quintiles=True,
                                 func=cmd_scale))

    probe_args = argparse.Namespace(
        **base, problems=str(paths["problems"]),
        hidden=args.hidden, lr=args.lr, epochs=args.epochs, batch_size=args.batch_size,
        l2=args.l2, func=cmd_probe)
    cmd_probe(probe_args)

    p = params.n_problems
    alloc_args = argparse.Namespace(
        **base, budgets=f"{p},{2 * p},{4 * p}", strategy="all",
        probe_model=str(out / "probe" / "model.json"),
        problems=str(paths["problems"]), n=None, func=cmd_allocate)
    cmd_allocate(alloc_args)

    report.write_json(out / "run_meta.json", {
        "demo": {"problems": params.n_problems, "solutions": params.n_solutions,
                 "tests": params.n_tests, "far": params.far, "frr": params.frr},
    }, _provenance(args))
    print(f"demo pipeline complete under {out}")
    return 0


# ---------------------------------------------------------------------------
# parser

SEED_REQUIRED = frozenset({"scale", "probe", "allocate"})


def _add_common(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--config", help="flat JSON file of flag defaults")
    sub.add_argument("--out", help="output directory")
    sub.add_argument("--seed", type=int, default=None,
                     help="random seed (required for stochastic commands)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="utscale", description=__doc__,
                                     formatter_class=argparse.RawDescriptionHelpFormatter)
    parser.add_argument("--version", action="version", version=f"utscale {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true")
    subs = parser.add_subparsers(dest="command", required=True)

    p = subs.add_parser("execute", help="run solutions against tests via a runner")
    _add_common(p)
    p.add_argument("--problems", help="problems.jsonl")
    p.add_argument("--solutions", help="solutions.jsonl")
    p.add_argument("--tests", help="tests.jsonl")
    p.add_argument("--runner-cmd", help="runner argv as one shell-quoted string")
    p.add_argument("--workers", type=int, default=4)
    p.add_argument("--timeout", type=float, default=executor.DEFAULT_TIMEOUT_S)
    p.add_argument("--memory-cap", type=int, default=None, help="bytes, best effort")
    p.add_argument("--no-cache", action="store_true")
    p.set_defaults(func=cmd_execute)

    p = subs.add_parser("select", help="majority-vote selection from matrices")
    _add_common(p)
    p.add_argument("--matrices", help="directory of matrix json files")
    p.add_argument("--gold", help="gold_labels.json for scoring (optional)")
    p.add_argument("--tie-rule", choices=("lowest_index", "random"), default="lowest_index")
    p.set_defaults(func=cmd_select)

    p = subs.add_parser("scale", help="bootstrap scaling curves")
    _add_common(p)
    p.add_argument("--matrices")
    p.add_argument("--gold")
    p.add_argument("--grid", default="1x1", help="comma list of NxM points, e.g. 5x1,5x32")
    p.add_argument("--samples", type=int, default=100)
    p.add_argument("--method", choices=("bootstrap", "exact"), default="bootstrap")
    p.add_argument("--quintiles", action="store_true", help="add per-quintile curves")
    p.set_defaults(func=cmd_scale)

    p = subs.add_parser("qc", help="unit-test quality control and metrics")
    _add_common(p)
    p.add_argument("--matrices")
    p.add_argument("--gold")
    p.add_argument("--policy", choices=quality.FILTER_POLICIES, default="accepts_all_incorrect")
    p.add_argument("--tau", type=float, default=None)
    p.set_defaults(func=cmd_qc)

    p = subs.add_parser("probe", help="train the difficulty probe")
    _add_common(p)
    p.add_argument("--problems", help="problems.jsonl with feature vectors")
    p.add_argument("--solutions", default=None, help=argparse.SUPPRESS)
    p.add_argument("--tests", default=None, help=argparse.SUPPRESS)
    p.add_argument("--gold")
    p.add_argument("--hidden", type=int, default=64)
    p.add_argument("--lr", type=float, default=0.3)
    p.add_argument("--epochs", type=int, default=300)
    p.add_argument("--batch-size", type=int, default=16)
    p.add_argument("--l2", type=float, default=0.0)
    p.set_defaults(func=cmd_probe)

    p = subs.add_parser("allocate", help="budget allocation strategies")
    _add_common(p)
    p.add_argument("--matrices")
    p.add_argument("--gold")
    p.add_argument("--budgets", help="comma list of total budgets B")
    p.add_argument("--strategy", default="all",
                   choices=("all",) + allocator.STRATEGIES)
    p.add_argument("--probe-model", help="probe checkpoint for greedy_predicted")
    p.add_argument("--problems", help="problems.jsonl (features for greedy_predicted)")
    p.add_argument("--samples", type=int, default=100)
    p.add_argument("--n", type=int, default=None, help="solutions drawn per problem")
    p.set_defaults(func=cmd_allocate)

    p = subs.add_parser("demo", help="synthetic corpus + full pipeline")
    _add_common(p)
    p.add_argument("--workers", type=int, default=8)
    p.add_argument("--timeout", type=float, default=10.0)
    p.add_argument("--no-cache", action="store_true")
    p.add_argument("--samples", type=int, default=100)
    p.add_argument("--hidden", type=int, default=16)
    p.add_argument("--lr", type=float, default=0.3)
    p.add_argument("--epochs", type=int, default=400)
    p.add_argument("--batch-size", type=int, default=16)
    p.add_argument("--l2", type=float, default=1e-4)
    p.set_defaults(func=cmd_demo, seed_default=7)

    return parser


def _apply_config(args: argparse.Namespace, argv: list[str]) -> None:
    if not getattr(args, "config", None):
        return
    path = Path(args.config)
    if not path.exists():
        raise ConfigError(f"config file not found: {path}")
    try:
        config = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config file is not valid JSON: {exc}") from exc
    if not isinstance(config, dict):
        raise ConfigError("config file must hold a flat JSON object")
    for key, value in config.items():
        dest = key.replace("-", "_")
        flag = "--" + key.replace("_", "-")
        given = any(a == flag or a.startswith(flag + "=") for a in argv)
        if not given and hasattr(args, dest):
            setattr(args, dest, value)


def main(argv: list[str] | None = None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.INFO,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        _apply_config(args, argv)
        if args.command == "demo" and args.seed is None:
            args.seed = 7
        if args.command in SEED_REQUIRED and args.seed is None:
            raise ConfigError(f"{args.command} is stochastic: --seed is required")
        return args.func(args)
    except (ConfigError, CorpusError, RunnerNotFound) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # experiment-level failure
        log.debug("traceback", exc_info=True)
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
