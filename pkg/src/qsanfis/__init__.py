"""Neuro-fuzzy regression with quantum-potential cluster centres.

Subtractive clustering fixes the number of rules, the lowest points of a
Schrodinger potential built from the data supply the rule centres, and a
first-order TSK network is fitted by alternating least squares and
gradient steps.
"""

from .anfis import AnfisModel, ForwardTrace, FuzzyRule, MembershipFn, build_from_clusters, forward, predict_batch
from .cluster_pipeline import ClusterModel, assign, gradient_descent_cluster, quantum_subtractive_cluster
from .dataset import Dataset, NormParams, Sample, load_csv, normalize_minmax, split_even_odd
from .quantum_potential import (GradientDescentConfig, KernelConfig, PotentialField, potential,
                                potential_field, potential_gradient, qc_gradient_descent, wave_function)
from .subtractive import DensityState, SubtractiveConfig, density, select_center_count, subtract
from .trainer import (TrainConfig, TrainReport, bp_premise_step, lse_consequents, rmse,
                      train_hybrid)

__version__ = "0.1.0"
