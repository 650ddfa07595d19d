"""Parzen wave function and the Schrodinger potential it implies.

For psi(x) = sum_i exp(-|x - x_i|^2 / (2 sigma^2)) the potential whose
ground state is psi is V(x) = E + T(x) with

    T(x) = (sigma^2 / 2) * lap(psi)(x) / psi(x)
         = -d/2 + sum_i |x - x_i|^2 e_i / (2 sigma^2 psi(x))

and E chosen so that V vanishes at its lowest evaluated point. The classic
quantum clustering baseline moves replicas of the data downhill on V.
"""

from __future__ import annotations

import csv
import logging
from dataclasses import dataclass
from pathlib import Path

import numpy as np

logger = logging.getLogger(__name__)

PSI_FLOOR = 1e-300
_LOG_PSI_FLOOR = np.log(PSI_FLOOR)


class PotentialError(ValueError):
    pass


class DivergenceError(RuntimeError):
    pass


@dataclass(frozen=True)
class KernelConfig:
    sigma: float = 0.25

    def __post_init__(self):
        if not self.sigma > 0:
            raise PotentialError(f"sigma must be positive, got {self.sigma}")


@dataclass(frozen=True)
class GradientDescentConfig:
    """Constant-rate descent; ``eta=None`` means 0.01 * sigma**2."""

    eta: float | None = None
    steps: int = 200

    def __post_init__(self):
        if self.eta is not None and not self.eta > 0:
            raise PotentialError(f"eta must be positive, got {self.eta}")
        if self.steps < 1:
            raise PotentialError(f"steps must be >= 1, got {self.steps}")

    def rate(self, sigma: float) -> float:
        return 0.01 * sigma ** 2 if self.eta is None else self.eta


@dataclass(frozen=True)
class PotentialField:
    points: np.ndarray
    sigma: float
    energy: float
    v: np.ndarray

    @property
    def raw(self) -> np.ndarray:
        """The un-offset ratio T at each point."""
        return self.v - self.energy

    def order(self) -> np.ndarray:
        """Sample indices by ascending potential, ties to the lower index."""
        return np.argsort(self.v, kind="stable")

    def write_table(self, path: str | Path, names: list[str] | None = None) -> None:
        d = self.points.shape[1]
        names = names or [f"x{j}" for j in range(d)]
        with Path(path).open("w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["index", *names, "v"])
            for k, (x, v) in enumerate(zip(self.points, self.v)):
                w.writerow([k, *(repr(float(c)) for c in x), repr(float(v))])


def _check(points, sigma, x=None):
    points = np.asarray(points, dtype=float)
    if points.ndim == 1:
        points = points[:, None]
    if points.ndim != 2 or points.shape[0] < 1:
        raise PotentialError(f"points must be a non-empty N x d matrix, got shape {points.shape}")
    if not sigma > 0:
        raise PotentialError(f"sigma must be positive, got {sigma}")
    if x is None:
        return points, None
    x = np.asarray(x, dtype=float)
    squeeze = x.ndim == 1
    x = np.atleast_2d(x)
    if points.shape[1] == 1 and x.shape[0] == 1 and x.shape[1] != 1 and squeeze:
        x = x.T
    if x.shape[1] != points.shape[1]:
        raise PotentialError(f"evaluation point has dimension {x.shape[1]}, data has {points.shape[1]}")
    return points, x


def _kernel_terms(x, points, sigma):
    """Differences, squared distances and max-shifted kernel weights.

    The shift by the nearest point's exponent cancels in every ratio; it is
    returned (as log scale) so callers can recover psi itself.
    """
    diff = x[:, None, :] - points[None, :, :]
    sq = np.einsum("mnd,mnd->mn", diff, diff)
    expo = -sq / (2.0 * sigma ** 2)
    shift = expo.max(axis=1)
    e = np.exp(expo - shift[:, None])
    return diff, sq, e, shift


def potential_ratio(x, points, sigma, strict=True):
    """T at an (M, d) batch; ``strict`` raises where psi underflows."""
    _, sq, e, shift = _kernel_terms(x, points, sigma)
    psi_scaled = e.sum(axis=1)
    if strict:
        log_psi = shift + np.log(psi_scaled)
        far = log_psi < _LOG_PSI_FLOOR
        if far.any():
            raise PotentialError(
                f"evaluation point too far from data (psi = exp({log_psi[far][0]:.1f}) < {PSI_FLOOR})")
    d = points.shape[1]
    return (sq * e).sum(axis=1) / (2.0 * sigma ** 2 * psi_scaled) - d / 2.0


def wave_function(x, points, sigma: float) -> float | np.ndarray:
    """Sum of Gaussian kernels centred on the data, evaluated at ``x``.

    ``x`` may be one point or an (M, d) batch.
    """
    points, xs = _check(points, sigma, x)
    diff = xs[:, None, :] - points[None, :, :]
    sq = np.einsum("mnd,mnd->mn", diff, diff)
    psi = np.exp(-sq / (2.0 * sigma ** 2)).sum(axis=1)
    return float(psi[0]) if np.ndim(x) <= 1 and xs.shape[0] == 1 else psi


def potential(x, points, sigma: float) -> float | np.ndarray:
    """The un-offset potential T(x); add the field's energy to get V(x)."""
    points, xs = _check(points, sigma, x)
    t = potential_ratio(xs, points, sigma, strict=True)
    return float(t[0]) if np.ndim(x) <= 1 and xs.shape[0] == 1 else t


def potential_gradient(x, points, sigma: float) -> np.ndarray:
    """Analytic gradient of V (identical to that of T) at one or many points."""
    points, xs = _check(points, sigma, x)
    diff, sq, e, _ = _kernel_terms(xs, points, sigma)
    s2 = sigma ** 2
    psi = e.sum(axis=1)
    S = (sq * e).sum(axis=1)
    grad_psi = -np.einsum("mn,mnd->md", e, diff) / s2
    grad_S = np.einsum("mn,mnd->md", e * (2.0 - sq / s2), diff)
    g = (grad_S / psi[:, None] - S[:, None] * grad_psi / psi[:, None] ** 2) / (2.0 * s2)
    return g[0] if np.ndim(x) <= 1 and xs.shape[0] == 1 else g


def potential_field(points, sigma: float) -> PotentialField:
    """Evaluate V at every sample with E fixed so the minimum sample is 0."""
    points, _ = _check(points, sigma)
    t = potential_ratio(points, points, sigma, strict=True)
    energy = -float(t.min())
    v = t + energy
    v[np.argmin(t)] = 0.0
    return PotentialField(points.copy(), float(sigma), energy, v)


def qc_gradient_descent(points, sigma: float, cfg: GradientDescentConfig | None = None) -> np.ndarray:
    """Move a replica of every sample downhill on V for ``cfg.steps`` steps.

    Raises DivergenceError if a replica leaves a box ten times the data's
    bounding-box diagonal around its centre.
    """
    cfg = cfg or GradientDescentConfig()
    points, _ = _check(points, sigma)
    eta = cfg.rate(sigma)
    lo, hi = points.min(axis=0), points.max(axis=0)
    centre = (lo + hi) / 2.0
    limit = 10.0 * max(float(np.linalg.norm(hi - lo)), sigma)

    z = points.copy()
    for step in range(1, cfg.steps + 1):
        z = z - eta * potential_gradient(z, points, sigma)
        dist = np.linalg.norm(z - centre, axis=1)
        if not np.all(np.isfinite(dist)) or dist.max() > limit:
            k = int(np.nanargmax(np.where(np.isfinite(dist), dist, np.inf)))
            raise DivergenceError(f"gradient descent diverged at step {step} (replica {k})")
    return z
