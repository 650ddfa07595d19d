"""Hybrid learning: least squares for consequents, gradient steps for premises."""

from __future__ import annotations

import csv
import logging
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .anfis import AnfisModel, firing, predict_batch, regressors, rule_outputs
from .dataset import Dataset

logger = logging.getLogger(__name__)

MIN_WIDTH = 0.01


class TrainingError(RuntimeError):
    pass


@dataclass(frozen=True)
class TrainConfig:
    epochs: int = 10
    learning_rate: float = 0.01
    ridge: float = 1e-9
    order: str = "first"

    def __post_init__(self):
        if self.epochs < 1:
            raise ValueError(f"epochs must be >= 1, got {self.epochs}")
        if not self.learning_rate > 0:
            raise ValueError(f"learning_rate must be positive, got {self.learning_rate}")
        if self.ridge < 0:
            raise ValueError(f"ridge must be >= 0, got {self.ridge}")


@dataclass(frozen=True)
class TrainReport:
    train_rmse: list[float]
    test_rmse: list[float]
    final_predictions_test: list[tuple[float, float]]
    rule_count: int

    @property
    def avg_test_rmse(self) -> float:
        return float(np.mean(self.test_rmse))

    @property
    def final_test_rmse(self) -> float:
        return self.test_rmse[-1]

    def write_epochs_csv(self, path: str | Path) -> None:
        with Path(path).open("w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["epoch", "train_rmse", "test_rmse"])
            for e, (a, b) in enumerate(zip(self.train_rmse, self.test_rmse), start=1):
                w.writerow([e, repr(a), repr(b)])

    def write_predictions_csv(self, path: str | Path) -> None:
        with Path(path).open("w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["index", "actual", "predicted"])
            for i, (a, p) in enumerate(self.final_predictions_test):
                w.writerow([i, repr(a), repr(p)])


def rmse(pred, actual) -> float:
    pred = np.asarray(pred, dtype=float).reshape(-1)
    actual = np.asarray(actual, dtype=float).reshape(-1)
    if pred.shape != actual.shape:
        raise ValueError(f"length mismatch: {pred.size} predictions, {actual.size} targets")
    if pred.size == 0:
        raise ValueError("rmse of an empty vector")
    return float(np.sqrt(np.mean((pred - actual) ** 2)))


def design_matrix(m: AnfisModel, X) -> np.ndarray:
    """Rows of wbar_i * [1, p] stacked rule by rule; y_hat = A @ theta."""
    _, w_bar, _ = firing(m, X)
    R = regressors(m, np.asarray(X, dtype=float))
    return (w_bar[:, :, None] * R[:, None, :]).reshape(R.shape[0], -1)


def lse_consequents(m: AnfisModel, train: Dataset, ridge: float = 1e-9) -> AnfisModel:
    """Globally optimal consequents for the current premises.

    Solves min |A theta - y|^2 + ridge |theta|^2 by least squares on the
    ridge-augmented system.
    """
    if len(train) == 0:
        raise TrainingError("empty training set")
    A = design_matrix(m, train.X)
    p = A.shape[1]
    if ridge == 0:
        if np.linalg.matrix_rank(A) < p:
            raise TrainingError(
                f"design matrix is rank deficient ({np.linalg.matrix_rank(A)} < {p}); use a positive ridge")
        theta = np.linalg.lstsq(A, train.y, rcond=None)[0]
    else:
        A_aug = np.vstack([A, np.sqrt(ridge) * np.eye(p)])
        y_aug = np.concatenate([train.y, np.zeros(p)])
        theta = np.linalg.lstsq(A_aug, y_aug, rcond=None)[0]
    out = m.copy()
    out.consequents = theta.reshape(m.consequents.shape)
    return out


def premise_gradients(m: AnfisModel, train: Dataset) -> tuple[np.ndarray, np.ndarray]:
    """Gradients of the summed squared error w.r.t. premise means and widths."""
    X, y = train.X, train.y
    _, w_bar, flagged = firing(m, X)
    f = rule_outputs(m, X)
    y_hat = np.einsum("nr,nr->n", w_bar, f)
    # d y_hat / d log w_i = wbar_i (f_i - y_hat); zero on fallback samples
    G = 2.0 * (y_hat - y)[:, None] * w_bar * (f - y_hat[:, None])
    G[flagged] = 0.0
    diff = X[:, None, :] - m.means[None, :, :]
    g_mu = np.einsum("nr,nrj->rj", G, diff) / m.widths ** 2
    g_sd = np.einsum("nr,nrj->rj", G, diff ** 2) / m.widths ** 3
    return g_mu, g_sd


def bp_premise_step(m: AnfisModel, train: Dataset, lr: float) -> AnfisModel:
    """One full-batch descent step on the premise means and widths."""
    if len(train) == 0:
        raise TrainingError("empty training set")
    if not lr > 0:
        raise ValueError(f"learning rate must be positive, got {lr}")
    g_mu, g_sd = premise_gradients(m, train)
    for name, g in (("mean", g_mu), ("width", g_sd)):
        bad = ~np.isfinite(g)
        if bad.any():
            i, j = map(int, np.argwhere(bad)[0])
            raise TrainingError(f"non-finite {name} gradient at rule {i}, input {j}")
    out = m.copy()
    out.means = m.means - lr * g_mu
    out.widths = np.maximum(m.widths - lr * g_sd, MIN_WIDTH)
    return out


def train_hybrid(m: AnfisModel, train: Dataset, test: Dataset,
                 cfg: TrainConfig | None = None) -> tuple[AnfisModel, TrainReport]:
    """Per epoch: LSE consequents, one premise step, then score both splits."""
    cfg = cfg or TrainConfig()
    for name, d in (("train", train), ("test", test)):
        if d.n_inputs != m.input_dim:
            raise TrainingError(f"{name} set has {d.n_inputs} inputs, model expects {m.input_dim}")
    train_err, test_err = [], []
    for epoch in range(1, cfg.epochs + 1):
        m = lse_consequents(m, train, cfg.ridge)
        m = bp_premise_step(m, train, cfg.learning_rate)
        train_err.append(rmse(predict_batch(m, train.X), train.y))
        test_err.append(rmse(predict_batch(m, test.X), test.y))
        logger.info("epoch %d: train rmse %.6f, test rmse %.6f", epoch, train_err[-1], test_err[-1])
    pred = predict_batch(m, test.X)
    report = TrainReport(train_err, test_err,
                         [(float(a), float(b)) for a, b in zip(test.y, pred)],
                         m.n_rules)
    return m, report
