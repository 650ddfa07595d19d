"""Subtractive (mountain-style) clustering, used to pick the cluster count.

Every sample is a candidate centre. Density is a Gaussian neighbour count
with radius ``r_a``; after a centre is chosen the densities around it are
knocked down with the wider radius ``r_b`` and the next peak is examined.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class SubtractiveConfig:
    r_a: float = 0.5
    r_b: float | None = None
    accept_ratio: float = 0.5
    reject_ratio: float = 0.15
    max_centers: int = 100

    def __post_init__(self):
        if not self.r_a > 0:
            raise ValueError(f"r_a must be positive, got {self.r_a}")
        if self.r_b is None:
            object.__setattr__(self, "r_b", 1.5 * self.r_a)
        if not self.r_b > 0:
            raise ValueError(f"r_b must be positive, got {self.r_b}")
        if not 0 < self.accept_ratio <= 1:
            raise ValueError(f"accept_ratio must lie in (0, 1], got {self.accept_ratio}")
        if not 0 <= self.reject_ratio < self.accept_ratio:
            raise ValueError("reject_ratio must lie in [0, accept_ratio)")
        if self.max_centers < 1:
            raise ValueError("max_centers must be >= 1")


@dataclass
class DensityState:
    d: np.ndarray
    selected: list[int] = field(default_factory=list)


@dataclass(frozen=True)
class TraceLine:
    index: int
    density: float
    ratio: float
    verdict: str

    def __str__(self):
        return f"{self.index}\t{self.density!r}\t{self.ratio:.6f}\t{self.verdict}"


@dataclass(frozen=True)
class SubtractiveResult:
    center_indices: list[int]
    centers: np.ndarray
    center_densities: list[float]
    trace: list[TraceLine]

    @property
    def k(self) -> int:
        return len(self.center_indices)

    def write_trace(self, path: str | Path) -> None:
        Path(path).write_text("index\tdensity\tratio\tverdict\n"
                              + "".join(f"{line}\n" for line in self.trace))


def _sq_dists(points: np.ndarray) -> np.ndarray:
    diff = points[:, None, :] - points[None, :, :]
    return np.einsum("ijd,ijd->ij", diff, diff)


def _as_matrix(points) -> np.ndarray:
    points = np.asarray(points, dtype=float)
    if points.ndim == 1:
        points = points[:, None]
    if points.ndim != 2 or points.shape[0] < 1:
        raise ValueError(f"points must be a non-empty N x d matrix, got shape {points.shape}")
    return points


def density(points, r_a: float) -> np.ndarray:
    """D_k = sum_k' exp(-|z_k - z_k'|^2 / (r_a/2)^2), self term included."""
    if not r_a > 0:
        raise ValueError(f"r_a must be positive, got {r_a}")
    points = _as_matrix(points)
    return np.exp(-_sq_dists(points) / (r_a / 2.0) ** 2).sum(axis=1)


def subtract(state: DensityState, points, r_b: float) -> DensityState:
    """Revise densities around the most recently selected centre."""
    if not state.selected:
        raise ValueError("no centre selected yet")
    if not r_b > 0:
        raise ValueError(f"r_b must be positive, got {r_b}")
    points = _as_matrix(points)
    v = state.selected[-1]
    diff = points - points[v]
    sq = np.einsum("kd,kd->k", diff, diff)
    d = state.d - state.d[v] * np.exp(-sq / (r_b / 2.0) ** 2)
    return DensityState(d, list(state.selected))


def select_center_count(points, cfg: SubtractiveConfig | None = None) -> SubtractiveResult:
    """Run subtractive clustering to completion.

    Stops when the best remaining density falls below ``reject_ratio`` of
    the first centre's. Candidates between the two ratios are taken only if
    ``d_min / r_a + D / D_first >= 1``; a refused candidate has its density
    zeroed and the next peak is tried.
    """
    cfg = cfg or SubtractiveConfig()
    points = _as_matrix(points)
    state = DensityState(density(points, cfg.r_a))
    trace: list[TraceLine] = []
    chosen_density: list[float] = []

    first = int(np.argmax(state.d))
    d_first = float(state.d[first])
    state.selected.append(first)
    chosen_density.append(d_first)
    trace.append(TraceLine(first, d_first, 1.0, "accept"))
    state = subtract(state, points, cfg.r_b)
    excluded = np.zeros(len(points), dtype=bool)
    excluded[first] = True

    while len(state.selected) < cfg.max_centers:
        if excluded.all():
            trace.append(TraceLine(-1, float("nan"), float("nan"), "exhausted"))
            break
        cand = int(np.argmax(np.where(excluded, -np.inf, state.d)))
        dc = float(state.d[cand])
        ratio = dc / d_first
        if ratio > cfg.accept_ratio:
            verdict = "accept"
        elif ratio < cfg.reject_ratio:
            trace.append(TraceLine(cand, dc, ratio, "stop"))
            break
        else:
            d_min = float(np.sqrt(np.min(np.sum((points[state.selected] - points[cand]) ** 2, axis=1))))
            verdict = "accept-gray" if d_min / cfg.r_a + ratio >= 1 else "refuse-gray"
        trace.append(TraceLine(cand, dc, ratio, verdict))
        excluded[cand] = True
        if verdict == "refuse-gray":
            state.d[cand] = 0.0
            continue
        state.selected.append(cand)
        chosen_density.append(dc)
        state = subtract(state, points, cfg.r_b)
    else:
        trace.append(TraceLine(-1, float("nan"), float("nan"), "max-centers"))

    logger.debug("subtractive clustering picked %d centres", len(state.selected))
    return SubtractiveResult(list(state.selected), points[state.selected].copy(), chosen_density, trace)
