"""Five-layer TSK fuzzy network with Gaussian premises, one rule per cluster.

Layer 1  Gaussian memberships  exp(-(p_j - mu_ij)^2 / (2 s_ij^2))
Layer 2  firing strength       w_i = prod_j membership_ij
Layer 3  normalisation         wbar_i = w_i / sum_l w_l
Layer 4  rule outputs          wbar_i * (a_i0 + sum_j a_ij p_j)
Layer 5  sum                   y_hat = sum_i wbar_i y_i
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .cluster_pipeline import SPREAD_FLOOR, ClusterModel

UNDERFLOW = 1e-12
ORDERS = ("zero", "first")


class ModelError(ValueError):
    pass


@dataclass(frozen=True)
class MembershipFn:
    mean: float
    width: float

    def __post_init__(self):
        if not self.width > 0:
            raise ModelError(f"membership width must be positive, got {self.width}")

    def __call__(self, p: float) -> float:
        return float(np.exp(-(p - self.mean) ** 2 / (2.0 * self.width ** 2)))


@dataclass(frozen=True)
class FuzzyRule:
    premise: tuple[MembershipFn, ...]
    consequent: tuple[float, ...]


@dataclass
class AnfisModel:
    """Rule parameters held as arrays.

    means, widths: (r, n); consequents: (r, n + 1) for first order, (r, 1)
    for zero order, column 0 being the constant term.
    """

    means: np.ndarray
    widths: np.ndarray
    consequents: np.ndarray
    order: str = "first"
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.means = np.atleast_2d(np.asarray(self.means, dtype=float))
        self.widths = np.atleast_2d(np.asarray(self.widths, dtype=float))
        self.consequents = np.atleast_2d(np.asarray(self.consequents, dtype=float))
        if self.order not in ORDERS:
            raise ModelError(f"order must be one of {ORDERS}, got {self.order!r}")
        r, n = self.means.shape
        if r < 1:
            raise ModelError("model needs at least one rule")
        if self.widths.shape != (r, n):
            raise ModelError(f"widths shape {self.widths.shape} != means shape {(r, n)}")
        if np.any(self.widths <= 0):
            raise ModelError("membership widths must be positive")
        want = (r, n + 1 if self.order == "first" else 1)
        if self.consequents.shape != want:
            raise ModelError(f"consequents shape {self.consequents.shape}, expected {want}")

    @property
    def n_rules(self) -> int:
        return self.means.shape[0]

    @property
    def input_dim(self) -> int:
        return self.means.shape[1]

    @property
    def rules(self) -> list[FuzzyRule]:
        return [FuzzyRule(tuple(MembershipFn(float(m), float(s)) for m, s in zip(mu, sd)),
                          tuple(float(a) for a in coef))
                for mu, sd, coef in zip(self.means, self.widths, self.consequents)]

    @classmethod
    def from_rules(cls, rules: Sequence[FuzzyRule], order: str = "first") -> "AnfisModel":
        return cls(np.array([[mf.mean for mf in r.premise] for r in rules]),
                   np.array([[mf.width for mf in r.premise] for r in rules]),
                   np.array([r.consequent for r in rules]), order)

    def copy(self) -> "AnfisModel":
        return AnfisModel(self.means.copy(), self.widths.copy(), self.consequents.copy(),
                          self.order, dict(self.meta))

    def to_dict(self) -> dict:
        return {
            "order": self.order,
            "n": self.input_dim,
            "r": self.n_rules,
            "rules": [{"mean": mu.tolist(), "width": sd.tolist(), "consequent": a.tolist()}
                      for mu, sd, a in zip(self.means, self.widths, self.consequents)],
            "meta": self.meta,
        }

    @classmethod
    def from_dict(cls, payload: dict) -> "AnfisModel":
        rules = payload["rules"]
        m = cls(np.array([r["mean"] for r in rules], dtype=float),
                np.array([r["width"] for r in rules], dtype=float),
                np.array([r["consequent"] for r in rules], dtype=float),
                payload["order"], payload.get("meta", {}))
        if m.input_dim != payload["n"] or m.n_rules != payload["r"]:
            raise ModelError("model file header disagrees with its rule list")
        return m

    def save(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=1) + "\n")

    @classmethod
    def load(cls, path: str | Path) -> "AnfisModel":
        return cls.from_dict(json.loads(Path(path).read_text()))


@dataclass(frozen=True)
class ForwardTrace:
    memberships: np.ndarray
    w: np.ndarray
    w_bar: np.ndarray
    rule_outputs: np.ndarray
    y_hat: float
    fallback: bool = False


def build_from_clusters(cm: ClusterModel, order: str = "first",
                        width_floor: float = SPREAD_FLOOR) -> AnfisModel:
    """One rule per cluster: premise at the centre, widths from the spread."""
    widths = np.maximum(np.asarray(cm.per_cluster_spread, dtype=float), width_floor)
    r, n = cm.centers.shape
    return AnfisModel(cm.centers.copy(), widths,
                      np.zeros((r, n + 1 if order == "first" else 1)), order)


def _check_inputs(m: AnfisModel, X) -> np.ndarray:
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X.reshape(-1, m.input_dim) if X.size else X.reshape(0, m.input_dim)
    if X.ndim != 2 or X.shape[1] != m.input_dim:
        raise ModelError(f"inputs have dimension {X.shape[-1]}, model expects {m.input_dim}")
    return X


def regressors(m: AnfisModel, X: np.ndarray) -> np.ndarray:
    """[1, p_1, ..., p_n] per sample, or just [1] for zero order."""
    ones = np.ones((X.shape[0], 1))
    return np.hstack([ones, X]) if m.order == "first" else ones


def firing(m: AnfisModel, X) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Raw and normalised firing strengths for a batch, plus fallback flags.

    Samples whose total strength is below the underflow floor get uniform
    normalised weights.
    """
    X = _check_inputs(m, X)
    z = (X[:, None, :] - m.means[None, :, :]) / m.widths[None, :, :]
    w = np.exp(-0.5 * np.einsum("nrj,nrj->nr", z, z))
    total = w.sum(axis=1)
    flagged = total < UNDERFLOW
    w_bar = np.empty_like(w)
    w_bar[~flagged] = w[~flagged] / total[~flagged, None]
    w_bar[flagged] = 1.0 / m.n_rules
    return w, w_bar, flagged


def rule_outputs(m: AnfisModel, X) -> np.ndarray:
    X = _check_inputs(m, X)
    return regressors(m, X) @ m.consequents.T


def forward(m: AnfisModel, p) -> ForwardTrace:
    p = np.asarray(p, dtype=float).reshape(-1)
    if p.shape[0] != m.input_dim:
        raise ModelError(f"input has dimension {p.shape[0]}, model expects {m.input_dim}")
    memberships = np.exp(-(p[None, :] - m.means) ** 2 / (2.0 * m.widths ** 2))
    w, w_bar, flagged = firing(m, p[None, :])
    y = rule_outputs(m, p[None, :])[0]
    return ForwardTrace(memberships, w[0], w_bar[0], y, float(w_bar[0] @ y), bool(flagged[0]))


def predict_batch(m: AnfisModel, X) -> np.ndarray:
    """Network output for every row of ``X`` (a matrix or a Dataset)."""
    X = getattr(X, "X", X)
    X = _check_inputs(m, X)
    if X.shape[0] == 0:
        return np.zeros(0)
    _, w_bar, _ = firing(m, X)
    return np.einsum("nr,nr->n", w_bar, rule_outputs(m, X))


def input_gradient(m: AnfisModel, p) -> np.ndarray:
    """d y_hat / d p at a single input."""
    t = forward(m, p)
    p = np.asarray(p, dtype=float).reshape(-1)
    dy = m.consequents[:, 1:] if m.order == "first" else np.zeros_like(m.means)
    if t.fallback:
        return t.w_bar @ dy
    dw = -t.w[:, None] * (p[None, :] - m.means) / m.widths ** 2
    total = t.w.sum()
    dwbar = (dw - t.w_bar[:, None] * dw.sum(axis=0)[None, :]) / total
    return t.rule_outputs @ dwbar + t.w_bar @ dy
