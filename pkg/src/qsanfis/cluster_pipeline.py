"""Cluster-centre selection feeding the fuzzy rule base.

The main route takes the cluster count from subtractive clustering and the
centres from the lowest-potential samples. The baseline route descends
replicas on the potential and keeps the k most populated basins.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .quantum_potential import (GradientDescentConfig, potential_ratio, potential_field,
                                qc_gradient_descent)
from .subtractive import SubtractiveConfig, select_center_count

logger = logging.getLogger(__name__)

SPREAD_FLOOR = 0.05


class ClusterError(ValueError):
    pass


@dataclass(frozen=True)
class ClusterModel:
    centers: np.ndarray
    center_indices: list[int]
    assignments: np.ndarray
    sigma: float
    r_a: float | None
    per_cluster_spread: np.ndarray
    method: str = "quantum-subtractive"

    @property
    def k(self) -> int:
        return len(self.center_indices)

    def to_dict(self) -> dict:
        return {
            "method": self.method,
            "k": self.k,
            "sigma": self.sigma,
            "r_a": self.r_a,
            "center_indices": list(self.center_indices),
            "centers": self.centers.tolist(),
            "per_cluster_spread": self.per_cluster_spread.tolist(),
            "assignments": self.assignments.tolist(),
        }

    @classmethod
    def from_dict(cls, payload: dict) -> "ClusterModel":
        return cls(
            centers=np.asarray(payload["centers"], dtype=float),
            center_indices=[int(i) for i in payload["center_indices"]],
            assignments=np.asarray(payload["assignments"], dtype=int),
            sigma=float(payload["sigma"]),
            r_a=None if payload["r_a"] is None else float(payload["r_a"]),
            per_cluster_spread=np.asarray(payload["per_cluster_spread"], dtype=float),
            method=payload.get("method", "quantum-subtractive"),
        )

    def save(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=1) + "\n")

    @classmethod
    def load(cls, path: str | Path) -> "ClusterModel":
        return cls.from_dict(json.loads(Path(path).read_text()))


def assign(points, centers) -> np.ndarray:
    """Nearest centre by Euclidean distance, ties to the lower centre id."""
    points = np.atleast_2d(np.asarray(points, dtype=float))
    centers = np.atleast_2d(np.asarray(centers, dtype=float))
    if centers.shape[0] < 1:
        raise ClusterError("need at least one centre")
    if points.shape[0] == 0:
        return np.zeros(0, dtype=int)
    diff = points[:, None, :] - centers[None, :, :]
    return np.argmin(np.einsum("nkd,nkd->nk", diff, diff), axis=1)


def cluster_spread(points, assignments, k: int, floor: float = SPREAD_FLOOR) -> np.ndarray:
    """Per-dimension population standard deviation of each cluster, floored."""
    points = np.asarray(points, dtype=float)
    spread = np.full((k, points.shape[1]), floor)
    for c in range(k):
        members = points[assignments == c]
        if len(members):
            spread[c] = np.maximum(members.std(axis=0), floor)
    return spread


def _select_by_potential(points, order, k, min_separation):
    chosen: list[int] = []
    sep = float(min_separation)
    while True:
        for idx in order:
            if len(chosen) == k:
                return chosen
            if idx in chosen:
                continue
            if sep > 0 and chosen:
                dist = np.sqrt(np.sum((points[chosen] - points[idx]) ** 2, axis=1))
                if dist.min() < sep:
                    continue
            chosen.append(int(idx))
        if len(chosen) == k:
            return chosen
        sep = sep / 2 if sep > 1e-12 else 0.0
        logger.info("only %d of %d centres found; relaxing separation to %g", len(chosen), k, sep)


def quantum_subtractive_cluster(points, sigma: float, sc: SubtractiveConfig | None = None,
                                min_separation: float = 0.0, k: int | None = None) -> ClusterModel:
    """Centres are the k samples of lowest potential, k from subtractive clustering.

    A positive ``min_separation`` skips samples closer than that to a centre
    already chosen, halving the distance whenever the sorted list runs out.
    ``k`` overrides the subtractive count.
    """
    sc = sc or SubtractiveConfig()
    points = np.asarray(points, dtype=float)
    if points.ndim == 1:
        points = points[:, None]
    if min_separation < 0:
        raise ClusterError("min_separation must be >= 0")
    if k is None:
        k = select_center_count(points, sc).k
    n_distinct = len(np.unique(points, axis=0))
    if k > n_distinct:
        raise ClusterError(f"k = {k} exceeds the {n_distinct} distinct samples")
    field = potential_field(points, sigma)
    chosen = _select_by_potential(points, field.order(), k, min_separation)
    centers = points[chosen].copy()
    labels = assign(points, centers)
    return ClusterModel(centers, chosen, labels, float(sigma), sc.r_a,
                        cluster_spread(points, labels, k))


def _group_replicas(z, v, tol):
    """Greedy basin grouping in ascending potential; returns member lists."""
    reps: list[int] = []
    groups: list[list[int]] = []
    for idx in np.argsort(v, kind="stable"):
        if reps:
            dist = np.sqrt(np.sum((z[reps] - z[idx]) ** 2, axis=1))
            g = int(np.argmin(dist))
            if dist[g] <= tol:
                groups[g].append(int(idx))
                continue
        reps.append(int(idx))
        groups.append([int(idx)])
    return groups


def gradient_descent_cluster(points, sigma: float, k: int,
                             cfg: GradientDescentConfig | None = None,
                             merge_tol: float | None = None) -> ClusterModel:
    """Baseline: descend replicas of the samples on V and keep k basins.

    Replicas ending within ``merge_tol`` (default 0.1 sigma) of a basin's
    lowest replica join that basin. The k most populated basins become the
    centres, each placed at its lowest replica. The tolerance is halved
    until at least k basins exist.
    """
    points = np.asarray(points, dtype=float)
    if points.ndim == 1:
        points = points[:, None]
    n_distinct = len(np.unique(points, axis=0))
    if k > n_distinct:
        raise ClusterError(f"k = {k} exceeds the {n_distinct} distinct samples")
    z = qc_gradient_descent(points, sigma, cfg)
    v = potential_ratio(z, points, sigma, strict=False)
    tol = 0.1 * sigma if merge_tol is None else merge_tol
    groups = _group_replicas(z, v, tol)
    while len(groups) < k and tol > 0:
        tol = tol / 2 if tol > 1e-12 else 0.0
        groups = _group_replicas(z, v, tol)
    if len(groups) < k:
        raise ClusterError(f"descent produced only {len(groups)} distinct basins, {k} requested")
    ranked = sorted(range(len(groups)), key=lambda g: (-len(groups[g]), v[groups[g][0]], groups[g][0]))
    reps = [groups[g][0] for g in ranked[:k]]
    centers = z[reps].copy()
    labels = assign(points, centers)
    logger.info("gradient-descent baseline: %d basins at tol %g, kept %d", len(groups), tol, k)
    return ClusterModel(centers, reps, labels, float(sigma), None,
                        cluster_spread(points, labels, k), method="gradient-descent")
