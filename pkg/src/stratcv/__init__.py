"""Simulation library for duplicate-induced cross-validation bias in
federated clinical datasets.

Submodules
----------
datagen     synthetic covariates and nonlinear logistic outcomes
federation  hospital assignment, duplicate injection, dedup audits
partition   fold partitioning strategies (random, stratified, unbiased)
boosting    gradient-boosted trees for binary classification, from scratch
crossval    k-fold cross-validation driver and accuracy curves
experiments replication experiments and their CSV exports
config      experiment configuration loading and scaling
rng         deterministic derivation of named random streams
"""

from . import boosting, config, crossval, datagen, experiments, federation, partition, rng

__all__ = [
    "boosting",
    "config",
    "crossval",
    "datagen",
    "experiments",
    "federation",
    "partition",
    "rng",
]

__version__ = "0.1.0"
