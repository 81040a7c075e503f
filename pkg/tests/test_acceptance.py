"""Acceptance suite: one test per release criterion, at its stated tolerance.

Run as `pytest -v tests/test_acceptance.py` for one pass/fail line per
criterion. Everything here runs against the built-in mock runner; no real
language harness is required.
"""

import itertools
import math
import time
from pathlib import Path

import numpy as np
import pytest

from utscale import cli, scaling
from utscale.allocator import equal_allocate, evaluate_allocation, greedy_allocate, q
from utscale.demo import DemoParams, generate
from utscale.difficulty import ProbeModel, TrainConfig, predict_lambda, probe_grad, probe_loss, train_probe
from utscale import quality
from utscale.reward import VerdictMatrix, select_best

# ---------------------------------------------------------------------------
# shared demo pipeline run (criteria 7 and 10)

DEMO_SECONDS: dict[str, float] = {}


@pytest.fixture(scope="module")
def demo_out(tmp_path_factory) -> Path:
    out = tmp_path_factory.mktemp("demo") / "run"
    started = time.monotonic()
    assert cli.main(["demo", "--out", str(out), "--seed", "7"]) == 0
    DEMO_SECONDS["wall"] = time.monotonic() - started
    return out


def _csv_rows(path: Path) -> list[list[str]]:
    lines = [l for l in path.read_text().splitlines() if l and not l.startswith("#")]
    return [line.split(",") for line in lines[1:]]


# ---------------------------------------------------------------------------

def test_criterion_01_greedy_optimality_oracle():
    """Greedy equals exhaustive enumeration for P<=4, lambda on a 0.05 grid,
    B<=8, to 1e-12; runtime < 10 s."""
    started = time.monotonic()
    grid = np.round(np.arange(0, 21) * 0.05, 2)
    max_budget = 8
    # (1 - lam)^b table, lam edge cases exact
    pow1m = np.array([[(1.0 - lam) ** b for b in range(max_budget + 1)] for lam in grid])

    checked = 0
    for n_problems in range(1, 5):
        compositions = {
            budget: np.array([c for c in itertools.product(range(budget + 1), repeat=n_problems)
                              if sum(c) == budget], dtype=np.intp)
            for budget in range(max_budget + 1)
        }
        # total reward is permutation-invariant, so multisets cover all instances
        for combo in itertools.combinations_with_replacement(range(len(grid)), n_problems):
            idx = np.array(combo, dtype=np.intp)
            lams = {f"p{k}": float(grid[i]) for k, i in enumerate(combo)}
            for budget in range(max_budget + 1):
                comps = compositions[budget]
                rewards = (1.0 - pow1m[idx[None, :], comps]).sum(axis=1)
                optimum = float(rewards.max())
                plan = greedy_allocate(lams, budget)
                assert abs(plan.total_reward() - optimum) <= 1e-12, (lams, budget)
                checked += 1
    elapsed = time.monotonic() - started
    assert checked == sum(
        math.comb(len(grid) + p - 1, p) * (max_budget + 1) for p in range(1, 5))
    assert elapsed < 10.0, f"oracle sweep took {elapsed:.1f}s"


def test_criterion_02_allocation_worked_example():
    """lambda {0.1, 0.5}, B=3 -> plan {0, 3} with reward 0.875, matching the
    brute-force table exactly."""
    plan = greedy_allocate({"p1": 0.1, "p2": 0.5}, 3)
    assert plan.budgets == {"p1": 0, "p2": 3}
    assert plan.total_reward() == pytest.approx(0.875, abs=1e-12)
    table = {
        (1, 2): q(0.1, 1) + q(0.5, 2),
        (2, 1): q(0.1, 2) + q(0.5, 1),
        (3, 0): q(0.1, 3) + q(0.5, 0),
    }
    assert table[(1, 2)] == pytest.approx(0.85, abs=1e-12)
    assert table[(2, 1)] == pytest.approx(0.69, abs=1e-12)
    assert table[(3, 0)] == pytest.approx(0.271, abs=1e-12)
    assert all(plan.total_reward() > v for v in table.values())


def test_criterion_03_probe_gradient_check():
    """Analytic gradient vs central finite differences (eps=1e-5): max
    relative error < 1e-4 over 100 random model/batch draws; < 30 s."""
    started = time.monotonic()
    rng = np.random.default_rng(2024)
    eps = 1e-5

    def rel(a: float, f: float) -> float:
        # absolute floor guards near-zero coordinates against FD roundoff
        return abs(a - f) / max(abs(a), abs(f), 1e-4)

    worst = 0.0
    for _ in range(100):
        d = int(rng.integers(2, 6))
        h = int(rng.integers(2, 8))
        batch = int(rng.integers(1, 12))
        model = ProbeModel(
            w1=rng.normal(0, 1.0, size=(h, d)), b1=rng.normal(0, 0.5, size=h),
            w2=rng.normal(0, 1.0, size=h), b2=float(rng.normal()),
        )
        x = rng.normal(size=(batch, d))
        lam = rng.uniform(0.05, 0.95, size=batch)
        grad = probe_grad(model, x, lam)

        params = (
            [("w1", i, j) for i in range(h) for j in range(d)]
            + [("b1", i) for i in range(h)]
            + [("w2", i) for i in range(h)]
            + [("b2",)]
        )
        for spec in params:
            name, index = spec[0], spec[1:]
            array = getattr(model, name)
            analytic = getattr(grad, name)[index] if index else grad.b2
            if index:
                array[index] += eps
                up = probe_loss(model, x, lam)
                array[index] -= 2 * eps
                down = probe_loss(model, x, lam)
                array[index] += eps
            else:
                model.b2 += eps
                up = probe_loss(model, x, lam)
                model.b2 -= 2 * eps
                down = probe_loss(model, x, lam)
                model.b2 += eps
            worst = max(worst, rel(float(analytic), (up - down) / (2 * eps)))
    elapsed = time.monotonic() - started
    assert worst < 1e-4, f"max relative gradient error {worst:.2e}"
    assert elapsed < 30.0, f"gradient check took {elapsed:.1f}s"


def test_criterion_04_probe_recovery():
    """Trained probe reaches the generator's Bayes entropy within 0.02,
    deterministically under the seed; < 60 s."""
    started = time.monotonic()
    rng = np.random.default_rng(404)
    x = rng.normal(size=(500, 4))
    v = np.array([1.2, -0.8, 0.5, -0.3])
    lam = 1.0 / (1.0 + np.exp(-(x @ v + 0.2)))
    # independent oracle: mean entropy of the generating soft targets
    bayes = float(np.mean(-(lam * np.log(lam) + (1 - lam) * np.log1p(-lam))))

    cfg = TrainConfig(hidden_dim=32, learning_rate=0.5, epochs=600, batch_size=64, seed=0)
    result = train_probe(x, lam, cfg)
    assert not result.diverged
    final = result.history[-1]
    assert final <= bayes + 0.02, f"loss {final:.4f} vs Bayes floor {bayes:.4f}"

    again = train_probe(x, lam, cfg)
    assert np.array_equal(result.model.w1, again.model.w1)
    assert np.array_equal(result.model.w2, again.model.w2)
    assert result.history == again.history
    assert time.monotonic() - started < 60.0


def test_criterion_05_voting_oracle():
    """select_best(lowest_index) equals an exhaustive argmax-first-tie scan on
    every binary matrix with N <= 4 and M <= 4. Exact."""
    checked = 0
    for n in range(1, 5):
        for m in range(0, 5):
            cells = n * m
            col = np.arange(cells)
            for word in range(1 << cells):
                bits = ((word >> col) & 1).astype(np.uint8).reshape(n, m)
                matrix = VerdictMatrix(
                    problem_id="p",
                    solution_ids=tuple(f"s{i}" for i in range(n)),
                    test_ids=tuple(f"t{j}" for j in range(m)),
                    bits=bits,
                )
                result = select_best(matrix, tie_rule="lowest_index")
                # independent oracle: linear scan keeping the first maximum
                best_i, best_c = 0, -1
                for i in range(n):
                    c = int(sum(bits[i]))
                    if c > best_c:
                        best_i, best_c = i, c
                assert result.chosen_index == best_i
                assert result.vote_counts[result.chosen_index] == best_c
                assert result.tie_broken == (sum(1 for v in result.vote_counts if v == best_c) > 1)
                checked += 1
    assert checked > 65_536


def test_criterion_06_bootstrap_exactness():
    """Enumeration mode equals the exact expectation (1e-12); sampling mode
    with 100 samples lands within 3 standard errors of it."""
    rng = np.random.default_rng(8)
    matrices, gold = {}, {}
    for k in range(4):
        pid = f"p{k}"
        n_sol, n_test = 3, 3
        bits = rng.integers(0, 2, size=(n_sol, n_test)).astype(np.uint8)
        matrices[pid] = VerdictMatrix(
            problem_id=pid,
            solution_ids=tuple(f"s{i}" for i in range(n_sol)),
            test_ids=tuple(f"t{j}" for j in range(n_test)),
            bits=bits,
        )
        flags = [bool(b) for b in rng.integers(0, 2, size=n_sol)]
        if not any(flags):
            flags[0] = True
        gold[pid] = {f"s{i}": flags[i] for i in range(n_sol)}

    n, m = 3, 2
    per_problem = []
    for pid, matrix in matrices.items():
        flags = [gold[pid][s] for s in matrix.solution_ids]
        hits = total = 0
        for rows in itertools.product(range(3), repeat=n):
            for cols in itertools.product(range(3), repeat=m):
                counts = [sum(matrix.bits[i][j] for j in cols) for i in rows]
                pick = counts.index(max(counts))
                hits += bool(flags[rows[pick]])
                total += 1
        per_problem.append(hits / total)
    oracle = float(np.mean(per_problem))

    exact, lo, hi = scaling.best_of_n_accuracy(matrices, gold, n, m, seed=1, method="exact")
    assert abs(exact - oracle) <= 1e-12
    assert lo == hi == exact

    samples = 100
    boot, _, _ = scaling.best_of_n_accuracy(matrices, gold, n, m, seed=1, samples=samples)
    se = math.sqrt(sum(p * (1 - p) for p in per_problem)) / len(per_problem) / math.sqrt(samples)
    assert abs(boot - oracle) <= 3 * se + 1e-12, f"{boot} vs {oracle} (se {se:.4f})"


def test_criterion_07_synthetic_scaling_law(demo_out):
    """On the demo corpus (independent noisy tests, FAR=0.3, FRR=0.1) the
    m=32 accuracy beats m=1 by >= 10 points with non-overlapping 95% CIs,
    and the hardest quintile gains more than the easiest; < 2 min."""
    rows = {int(r[1]): (float(r[2]), float(r[3]), float(r[4]))
            for r in _csv_rows(demo_out / "reports" / "scale_curve.csv")}
    mean1, lo1, hi1 = rows[1]
    mean32, lo32, hi32 = rows[32]
    assert mean32 - mean1 >= 0.10, f"gain {mean32 - mean1:.3f}"
    assert hi1 < lo32, f"CIs overlap: [{lo1:.3f},{hi1:.3f}] vs [{lo32:.3f},{hi32:.3f}]"

    quintiles = {}
    for row in _csv_rows(demo_out / "reports" / "scale_quintiles.csv"):
        bucket, m, mean = int(row[0]), int(row[2]), float(row[3])
        quintiles.setdefault(bucket, {})[m] = mean
    easiest_gain = quintiles[1][32] - quintiles[1][1]
    hardest_gain = quintiles[5][32] - quintiles[5][1]
    assert hardest_gain > easiest_gain, (hardest_gain, easiest_gain)

    assert DEMO_SECONDS["wall"] < 120.0, f"demo took {DEMO_SECONDS['wall']:.0f}s"


def test_criterion_08_dynamic_vs_equal_allocation():
    """Greedy-on-gold-rate allocation never scores below equal allocation at
    B in {P, 2P, 4P}, and the gold >= predicted >= equal ordering holds
    within CI on at least 2 of 3 budgets; < 2 min."""
    started = time.monotonic()
    params = DemoParams(seed=8, n_problems=32, n_solutions=20, n_tests=64,
                        far=0.6, frr=0.0, lambda_levels=(0.3, 0.45, 0.6, 0.75))
    data = generate(params)
    pids = sorted(data.matrices)
    x = np.array([data.corpus.problems[p].feature_vector for p in pids])
    lam = np.array([data.lambdas[p] for p in pids])
    probe = train_probe(x, lam, TrainConfig(hidden_dim=16, learning_rate=0.3,
                                            epochs=400, batch_size=16, seed=8, l2=1e-4))
    predicted = {p: float(v) for p, v in zip(pids, predict_lambda(probe.model, x))}

    P = params.n_problems
    ordering_ok = 0
    for budget in (P, 2 * P, 4 * P):
        scores = {}
        for strategy, lams in (("equal", data.lambdas), ("greedy_gold", data.lambdas),
                               ("greedy_predicted", predicted)):
            if strategy == "equal":
                plan = equal_allocate(pids, budget, lams)
            else:
                plan = greedy_allocate({p: lams[p] for p in pids}, budget, strategy)
            scores[strategy] = evaluate_allocation(plan, data.matrices, data.gold_labels,
                                                   seed=8, samples=100)
        gold_m, pred_m, eq_m = (scores["greedy_gold"][0], scores["greedy_predicted"][0],
                                scores["equal"][0])
        assert gold_m >= eq_m, f"B={budget}: greedy_gold {gold_m:.4f} < equal {eq_m:.4f}"
        # ordering holds within CI: not significantly inverted at either link
        gold_vs_pred = gold_m >= pred_m or scores["greedy_gold"][2] >= scores["greedy_predicted"][1]
        pred_vs_eq = pred_m >= eq_m or scores["greedy_predicted"][2] >= scores["equal"][1]
        ordering_ok += gold_vs_pred and pred_vs_eq
    assert ordering_ok >= 2, f"ordering held on {ordering_ok}/3 budgets"
    assert time.monotonic() - started < 120.0


def test_criterion_09_quality_hand_example():
    """Pool of 2 correct + 2 incorrect where the test accepts both correct and
    one incorrect: accuracy 0.75, F1 0.8, FAR 0.5, FRR 0, exactly."""
    matrix = VerdictMatrix(
        problem_id="p",
        solution_ids=("c1", "c2", "w1", "w2"),
        test_ids=("t",),
        bits=np.array([[1], [1], [1], [0]], dtype=np.uint8),
    )
    gold = {"c1": True, "c2": True, "w1": False, "w2": False}
    report = quality.test_quality(matrix, gold, "t")
    assert report.accuracy == 0.75
    assert report.f1 == 0.8
    assert report.far == 0.5
    assert report.frr == 0.0


def test_criterion_10_determinism_of_seeded_commands(demo_out, tmp_path):
    """Every seeded subcommand, run twice, emits byte-identical reports and
    figures (execution logs carry wall times and are exempt)."""
    matrices = str(demo_out / "matrices")
    gold = str(demo_out / "gold_labels.json")
    problems = str(demo_out / "inputs" / "problems.jsonl")
    commands = {
        "select": ["select", "--matrices", matrices, "--gold", gold,
                   "--tie-rule", "random", "--seed", "21"],
        "scale": ["scale", "--matrices", matrices, "--gold", gold,
                  "--grid", "5x1,5x8,5x32", "--samples", "100", "--seed", "21",
                  "--quintiles"],
        "qc": ["qc", "--matrices", matrices, "--gold", gold],
        "probe": ["probe", "--problems", problems, "--gold", gold,
                  "--hidden", "8", "--epochs", "60", "--seed", "21"],
        "allocate": ["allocate", "--matrices", matrices, "--gold", gold,
                     "--budgets", "71,142", "--strategy", "all",
                     "--probe-model", str(demo_out / "probe" / "model.json"),
                     "--problems", problems, "--seed", "21"],
    }
    for name, argv in commands.items():
        runs = []
        for attempt in ("one", "two"):
            dest = tmp_path / f"{name}_{attempt}"
            assert cli.main(argv + ["--out", str(dest)]) == 0, name
            payload = {
                path.relative_to(dest): path.read_bytes()
                for sub in ("reports", "figures", "plans", "probe")
                for path in sorted((dest / sub).rglob("*"))
                if path.is_file()
            }
            assert payload, name
            runs.append(payload)
        assert runs[0].keys() == runs[1].keys(), name
        for rel, blob in runs[0].items():
            assert runs[1][rel] == blob, f"{name}: {rel} differs between runs"
