"""Problem difficulty estimation and the pass-rate probe.

Difficulty is the empirical pass rate of a problem's sampled solutions.
The probe is a two-layer feedforward network (tanh hidden layer, sigmoid
output) mapping a per-problem feature vector to a predicted pass rate,
trained by mini-batch gradient descent on the soft-target cross-entropy

    loss = mean_i -[ lam_i log p_i + (1 - lam_i) log(1 - p_i) ]

with lam_i in [0, 1]. The forward/backward pass is written against the
logit z (loss = lam * softplus(-z) + (1 - lam) * softplus(z)) so the loss
and its exact analytic gradient stay finite for any parameter values.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np


@dataclass(frozen=True)
class DifficultyEstimate:
    problem_id: str
    lam: float
    n_samples: int


def estimate_lambda(passed_flags: Sequence[bool], problem_id: str = "") -> DifficultyEstimate:
    """Mean pass rate of the given gold-suite outcomes."""
    flags = list(passed_flags)
    if not flags:
        raise ValueError("estimate_lambda needs at least one evaluated solution")
    return DifficultyEstimate(
        problem_id=problem_id,
        lam=float(sum(bool(f) for f in flags) / len(flags)),
        n_samples=len(flags),
    )


def _softplus(z: np.ndarray) -> np.ndarray:
    # log(1 + e^z) without overflow for large |z|
    return np.maximum(z, 0.0) + np.log1p(np.exp(-np.abs(z)))


def _sigmoid(z: np.ndarray) -> np.ndarray:
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


@dataclass
class ProbeModel:
    """theta = (w1: h x d, b1: h, w2: h, b2: scalar), activation fixed to tanh."""

    w1: np.ndarray
    b1: np.ndarray
    w2: np.ndarray
    b2: float
    activation: str = "tanh"

    def __post_init__(self):
        if self.activation != "tanh":
            raise ValueError("only the tanh activation is supported")
        self.w1 = np.asarray(self.w1, dtype=np.float64)
        self.b1 = np.asarray(self.b1, dtype=np.float64)
        self.w2 = np.asarray(self.w2, dtype=np.float64)
        self.b2 = float(self.b2)

    @property
    def input_dim(self) -> int:
        return self.w1.shape[1]

    @property
    def hidden_dim(self) -> int:
        return self.w1.shape[0]

    @classmethod
    def init(cls, input_dim: int, hidden_dim: int, seed: int) -> "ProbeModel":
        rng = np.random.default_rng(seed)
        return cls(
            w1=rng.normal(0.0, 1.0 / np.sqrt(input_dim), size=(hidden_dim, input_dim)),
            b1=np.zeros(hidden_dim),
            w2=rng.normal(0.0, 1.0 / np.sqrt(hidden_dim), size=hidden_dim),
            b2=0.0,
        )

    def logits(self, x: np.ndarray) -> np.ndarray:
        x = np.atleast_2d(np.asarray(x, dtype=np.float64))
        if x.shape[1] != self.input_dim:
            raise ValueError(f"feature dimension {x.shape[1]} != model dimension {self.input_dim}")
        hidden = np.tanh(x @ self.w1.T + self.b1)
        return hidden @ self.w2 + self.b2

    def save(self, path: str | Path) -> None:
        obj = {
            "activation": self.activation,
            "input_dim": self.input_dim,
            "hidden_dim": self.hidden_dim,
            "w1": self.w1.tolist(),
            "b1": self.b1.tolist(),
            "w2": self.w2.tolist(),
            "b2": self.b2,
        }
        Path(path).write_text(json.dumps(obj, sort_keys=True) + "\n", encoding="utf-8")

    @classmethod
    def load(cls, path: str | Path) -> "ProbeModel":
        obj = json.loads(Path(path).read_text(encoding="utf-8"))
        return cls(w1=np.array(obj["w1"]), b1=np.array(obj["b1"]),
                   w2=np.array(obj["w2"]), b2=obj["b2"], activation=obj["activation"])


@dataclass
class ProbeGradient:
    w1: np.ndarray
    b1: np.ndarray
    w2: np.ndarray
    b2: float


@dataclass
class TrainConfig:
    hidden_dim: int = 64
    learning_rate: float = 0.5
    epochs: int = 500
    batch_size: int = 32
    seed: int = 0
    l2: float = 0.0

    def __post_init__(self):
        if min(self.hidden_dim, self.epochs, self.batch_size) < 1:
            raise ValueError("hidden_dim, epochs, and batch_size must be positive")
        if self.learning_rate < 0 or self.l2 < 0:
            raise ValueError("learning_rate and l2 must be non-negative")


@dataclass
class TrainResult:
    model: ProbeModel
    history: list[float] = field(default_factory=list)
    diverged: bool = False


def _check_batch(model: ProbeModel, x: np.ndarray, lam: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    x = np.atleast_2d(np.asarray(x, dtype=np.float64))
    lam = np.asarray(lam, dtype=np.float64).reshape(-1)
    if x.shape[0] != lam.shape[0]:
        raise ValueError(f"{x.shape[0]} feature rows vs {lam.shape[0]} targets")
    if x.size and not np.isfinite(x).all():
        raise ValueError("non-finite feature values")
    if lam.size and (lam.min() < 0.0 or lam.max() > 1.0):
        raise ValueError("targets must lie in [0, 1]")
    return x, lam


def probe_loss(model: ProbeModel, x: np.ndarray, lam: np.ndarray) -> float:
    """Mean soft-target binary cross-entropy over the batch."""
    x, lam = _check_batch(model, x, lam)
    if lam.size == 0:
        return 0.0
    z = model.logits(x)
    return float(np.mean(lam * _softplus(-z) + (1.0 - lam) * _softplus(z)))


def probe_grad(model: ProbeModel, x: np.ndarray, lam: np.ndarray) -> ProbeGradient:
    """Exact analytic gradient of probe_loss w.r.t. every parameter."""
    x, lam = _check_batch(model, x, lam)
    if lam.size == 0:
        return ProbeGradient(np.zeros_like(model.w1), np.zeros_like(model.b1),
                             np.zeros_like(model.w2), 0.0)
    hidden = np.tanh(x @ model.w1.T + model.b1)  # (B, h)
    z = hidden @ model.w2 + model.b2
    dz = (_sigmoid(z) - lam) / lam.size  # dL/dz
    dw2 = hidden.T @ dz
    db2 = float(dz.sum())
    dhidden = np.outer(dz, model.w2)
    dpre = dhidden * (1.0 - hidden * hidden)  # tanh'
    dw1 = dpre.T @ x
    db1 = dpre.sum(axis=0)
    return ProbeGradient(dw1, db1, dw2, db2)


def predict_lambda(model: ProbeModel, x: np.ndarray) -> np.ndarray:
    """Predicted pass rate(s) in (0, 1); accepts one vector or a batch."""
    squeeze = np.asarray(x).ndim == 1
    p = _sigmoid(model.logits(x))
    return float(p[0]) if squeeze else p


def train_probe(x: np.ndarray, lam: np.ndarray, cfg: TrainConfig) -> TrainResult:
    """Mini-batch gradient descent; deterministic for a fixed cfg.seed.

    Weight decay (cfg.l2) applies to w1/w2 only. On a non-finite loss the
    run stops and the result is returned with diverged=True.
    """
    x = np.atleast_2d(np.asarray(x, dtype=np.float64))
    lam = np.asarray(lam, dtype=np.float64).reshape(-1)
    if x.shape[0] == 0:
        raise ValueError("empty training set")
    model = ProbeModel.init(x.shape[1], cfg.hidden_dim, cfg.seed)
    _check_batch(model, x, lam)
    rng = np.random.default_rng(cfg.seed + 1)
    history: list[float] = []
    n = x.shape[0]
    for _ in range(cfg.epochs):
        order = rng.permutation(n)
        for start in range(0, n, cfg.batch_size):
            idx = order[start:start + cfg.batch_size]
            g = probe_grad(model, x[idx], lam[idx])
            if cfg.l2:
                g.w1 += cfg.l2 * model.w1
                g.w2 += cfg.l2 * model.w2
            model.w1 -= cfg.learning_rate * g.w1
            model.b1 -= cfg.learning_rate * g.b1
            model.w2 -= cfg.learning_rate * g.w2
            model.b2 -= cfg.learning_rate * g.b2
        epoch_loss = probe_loss(model, x, lam)
        history.append(epoch_loss)
        if not np.isfinite(epoch_loss):
            return TrainResult(model=model, history=history, diverged=True)
    return TrainResult(model=model, history=history, diverged=False)


def bayes_entropy(lam: Sequence[float]) -> float:
    """Mean entropy of the targets: the loss floor a perfect predictor attains."""
    lam = np.asarray(lam, dtype=np.float64)
    with np.errstate(divide="ignore", invalid="ignore"):
        h = -(np.where(lam > 0, lam * np.log(lam), 0.0)
              + np.where(lam < 1, (1 - lam) * np.log1p(-lam), 0.0))
    return float(np.mean(h))
