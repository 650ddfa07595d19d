"""End-to-end runs: load, normalise, split, cluster, build, train."""

from __future__ import annotations

import dataclasses
import logging
from dataclasses import dataclass
from pathlib import Path

from .anfis import AnfisModel, build_from_clusters
from .cluster_pipeline import ClusterModel, gradient_descent_cluster, quantum_subtractive_cluster
from .dataset import Dataset, NormParams, load_csv, normalize_minmax, split_even_odd
from .quantum_potential import GradientDescentConfig, PotentialField, potential_field
from .subtractive import SubtractiveConfig, SubtractiveResult, select_center_count
from .trainer import TrainConfig, TrainReport, train_hybrid

logger = logging.getLogger(__name__)

MPG_INPUTS = ("cylinders", "displacement", "horsepower", "weight", "acceleration", "model_year")
METHODS = ("quantum-subtractive", "gradient-descent")


@dataclass(frozen=True)
class PipelineConfig:
    data: str = "data/auto-mpg.csv"
    target: str = "mpg"
    inputs: tuple[str, ...] | None = MPG_INPUTS
    missing_token: str = "?"
    sigma: float = 0.25
    ra: float = 0.5
    rb: float | None = None
    min_separation: float = 0.0
    order: str = "first"
    epochs: int = 10
    lr: float = 0.01
    ridge: float = 1e-9
    swap_split: bool = False
    centers: str = "quantum-subtractive"
    gd_steps: int = 200
    gd_eta: float | None = None
    out: str = "out"

    def __post_init__(self):
        if self.centers not in METHODS:
            raise ValueError(f"centers must be one of {METHODS}, got {self.centers!r}")
        if self.order not in ("zero", "first"):
            raise ValueError(f"order must be 'zero' or 'first', got {self.order!r}")
        if not self.sigma > 0:
            raise ValueError(f"sigma must be positive, got {self.sigma}")
        if self.min_separation < 0:
            raise ValueError("min_separation must be >= 0")
        # fail early on bad numeric knobs
        self.subtractive
        self.train_config
        self.gd_config

    @property
    def subtractive(self) -> SubtractiveConfig:
        return SubtractiveConfig(r_a=self.ra, r_b=self.rb)

    @property
    def train_config(self) -> TrainConfig:
        return TrainConfig(epochs=self.epochs, learning_rate=self.lr, ridge=self.ridge, order=self.order)

    @property
    def gd_config(self) -> GradientDescentConfig:
        return GradientDescentConfig(eta=self.gd_eta, steps=self.gd_steps)

    def replace(self, **changes) -> "PipelineConfig":
        return dataclasses.replace(self, **changes)

    def as_lines(self) -> list[str]:
        """Flat ``key = value`` lines, readable back as a config file.

        The output directory is left out so that identical runs written to
        different places produce identical files.
        """
        lines = []
        for f in dataclasses.fields(self):
            v = getattr(self, f.name)
            if v is None or f.name == "out":
                continue
            if isinstance(v, tuple):
                v = ",".join(v)
            elif isinstance(v, bool):
                v = "true" if v else "false"
            lines.append(f"{f.name.replace('_', '-')} = {v}")
        return lines


@dataclass
class Prepared:
    full: Dataset
    norm: NormParams
    train: Dataset
    test: Dataset


@dataclass
class ClusterRun:
    prepared: Prepared
    subtractive: SubtractiveResult
    field: PotentialField
    clusters: ClusterModel


@dataclass
class TrainRun:
    cluster: ClusterRun
    model: AnfisModel
    report: TrainReport


def prepare(cfg: PipelineConfig) -> Prepared:
    raw = load_csv(cfg.data, cfg.target, cfg.missing_token, cfg.inputs)
    full, norm = normalize_minmax(raw)
    train, test = split_even_odd(full, swap=cfg.swap_split)
    return Prepared(full, norm, train, test)


def run_cluster(cfg: PipelineConfig, prepared: Prepared | None = None) -> ClusterRun:
    prepared = prepared or prepare(cfg)
    X = prepared.train.X
    sc = select_center_count(X, cfg.subtractive)
    field = potential_field(X, cfg.sigma)
    if cfg.centers == "quantum-subtractive":
        clusters = quantum_subtractive_cluster(X, cfg.sigma, cfg.subtractive, cfg.min_separation, k=sc.k)
    else:
        clusters = gradient_descent_cluster(X, cfg.sigma, sc.k, cfg.gd_config)
    logger.info("%s centres: k = %d", cfg.centers, clusters.k)
    return ClusterRun(prepared, sc, field, clusters)


def run_train(cfg: PipelineConfig, prepared: Prepared | None = None) -> TrainRun:
    cr = run_cluster(cfg, prepared)
    model = build_from_clusters(cr.clusters, cfg.order)
    model, report = train_hybrid(model, cr.prepared.train, cr.prepared.test, cfg.train_config)
    p = cr.prepared
    model.meta = {
        "input_names": list(p.full.input_names),
        "target_name": p.full.target_name,
        "norm": p.norm.to_dict(),
        "centers": cfg.centers,
    }
    return TrainRun(cr, model, report)


def read_config_file(path: str | Path) -> dict[str, str]:
    """Parse flat ``key = value`` lines; ``#`` starts a comment."""
    out = {}
    for lineno, line in enumerate(Path(path).read_text().splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"{path}:{lineno}: expected 'key = value', got {line!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        out[key.lstrip("-").replace("-", "_")] = value
    return out
