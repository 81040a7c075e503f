"""Report writers: delimited output plus rendered figures.

Analysis subcommands emit plot-ready CSV (with provenance comment lines)
and render a matplotlib figure next to it. Figures are written through the
Agg backend with pinned metadata so that seeded runs produce byte-identical
files.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Mapping, Sequence

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

_PNG_METADATA = {"Software": "utscale"}
_BUCKET_COLORS = ["#2c7fb8", "#41b6c4", "#a1dab4", "#fe9929", "#d95f0e"]


def provenance_lines(provenance: Mapping[str, object]) -> list[str]:
    return [f"# {key}={provenance[key]}" for key in provenance]


def write_csv(path: str | Path, header: Sequence[str], rows: Sequence[Sequence[object]],
              provenance: Mapping[str, object] | None = None) -> None:
    lines = provenance_lines(provenance or {})
    lines.append(",".join(header))
    lines.extend(",".join(str(cell) for cell in row) for row in rows)
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def write_json(path: str | Path, obj: dict, provenance: Mapping[str, object] | None = None) -> None:
    if provenance:
        obj = {**obj, "provenance": dict(provenance)}
    Path(path).write_text(json.dumps(obj, sort_keys=True, indent=2) + "\n", encoding="utf-8")


def _save(fig, path: str | Path) -> None:
    fig.savefig(path, dpi=120, metadata=_PNG_METADATA)
    plt.close(fig)


def save_curve_figure(path: str | Path,
                      series: Mapping[str, tuple[Sequence[int], Sequence[float],
                                                 Sequence[float], Sequence[float]]],
                      title: str = "Best-of-n accuracy vs number of unit tests") -> None:
    """series maps a label (one per n) to (ms, mean, ci_low, ci_high)."""
    fig, ax = plt.subplots(figsize=(6.4, 4.2))
    all_ms: list[int] = []
    for idx, label in enumerate(sorted(series)):
        ms, mean, lo, hi = series[label]
        color = _BUCKET_COLORS[idx % len(_BUCKET_COLORS)]
        ax.plot(ms, mean, marker="o", color=color, label=label)
        ax.fill_between(ms, lo, hi, color=color, alpha=0.2)
        all_ms.extend(ms)
    if len(set(all_ms)) > 1 and min(all_ms) >= 1:
        ax.set_xscale("log", base=2)
    ax.set_xlabel("unit tests m (drawn with replacement)")
    ax.set_ylabel("accuracy")
    ax.set_ylim(0.0, 1.02)
    ax.grid(True, alpha=0.3)
    ax.set_title(title)
    ax.legend(loc="lower right")
    _save(fig, path)


def save_quintile_figure(path: str | Path, ms: Sequence[int],
                         bucket_means: Mapping[int, Sequence[float]]) -> None:
    fig, ax = plt.subplots(figsize=(6.4, 4.2))
    for bucket in sorted(bucket_means):
        label = f"quintile {bucket}" + (" (easiest)" if bucket == 1 else
                                        " (hardest)" if bucket == 5 else "")
        ax.plot(ms, bucket_means[bucket], marker="o",
                color=_BUCKET_COLORS[(bucket - 1) % len(_BUCKET_COLORS)], label=label)
    if len(ms) > 1 and min(ms) >= 1:
        ax.set_xscale("log", base=2)
    ax.set_xlabel("unit tests m")
    ax.set_ylabel("accuracy")
    ax.set_ylim(0.0, 1.02)
    ax.grid(True, alpha=0.3)
    ax.set_title("Scaling by difficulty quintile")
    ax.legend(loc="lower right", fontsize=8)
    _save(fig, path)


def save_allocation_figure(path: str | Path,
                           rows: Sequence[tuple[str, int, float, float, float]]) -> None:
    """rows: (strategy, budget, mean, ci_low, ci_high)."""
    strategies = sorted({r[0] for r in rows})
    fig, ax = plt.subplots(figsize=(6.4, 4.2))
    colors = {"equal": "#999999", "greedy_gold": "#d95f0e", "greedy_predicted": "#2c7fb8"}
    for strategy in strategies:
        pts = sorted((r[1], r[2], r[3], r[4]) for r in rows if r[0] == strategy)
        budgets = [p[0] for p in pts]
        means = [p[1] for p in pts]
        err_lo = [p[1] - p[2] for p in pts]
        err_hi = [p[3] - p[1] for p in pts]
        ax.errorbar(budgets, means, yerr=[err_lo, err_hi], marker="o", capsize=3,
                    color=colors.get(strategy, None), label=strategy)
    ax.set_xlabel("total unit-test budget B")
    ax.set_ylabel("accuracy")
    ax.grid(True, alpha=0.3)
    ax.set_title("Budget allocation strategies")
    ax.legend(loc="lower right")
    _save(fig, path)


def save_quality_figure(path: str | Path,
                        per_test: Sequence[tuple[str, float | None, float | None]],
                        ensemble: tuple[float | None, float | None] | None = None) -> None:
    """per_test: (test_id, far, frr) points; ensemble: (far, frr)."""
    fars = [far for _, far, frr in per_test if far is not None and frr is not None]
    frrs = [frr for _, far, frr in per_test if far is not None and frr is not None]
    fig, ax = plt.subplots(figsize=(5.4, 5.0))
    ax.scatter(fars, frrs, s=22, alpha=0.65, color="#2c7fb8", label="single test")
    if ensemble is not None and ensemble[0] is not None and ensemble[1] is not None:
        ax.scatter([ensemble[0]], [ensemble[1]], s=130, marker="*", color="#d95f0e",
                   label="ensemble (majority)")
    ax.set_xlabel("false acceptance rate")
    ax.set_ylabel("false rejection rate")
    ax.set_xlim(-0.02, 1.02)
    ax.set_ylim(-0.02, 1.02)
    ax.grid(True, alpha=0.3)
    ax.set_title("Unit tests as classifiers")
    ax.legend(loc="upper right")
    _save(fig, path)


def save_history_figure(path: str | Path, history: Sequence[float],
                        floor: float | None = None) -> None:
    fig, ax = plt.subplots(figsize=(6.4, 4.2))
    ax.plot(range(1, len(history) + 1), history, color="#2c7fb8", label="training loss")
    if floor is not None:
        ax.axhline(floor, color="#d95f0e", linestyle="--", label="target entropy floor")
    ax.set_xlabel("epoch")
    ax.set_ylabel("cross-entropy loss")
    ax.grid(True, alpha=0.3)
    ax.set_title("Difficulty probe training")
    ax.legend(loc="upper right")
    _save(fig, path)
