"""Experiment configuration: defaults, flat key=value files, scaling.

The config file is a flat key=value document; every key names a field below
(training fields are flattened: rounds, max_depth, eta, reg_lambda, gamma,
min_child_weight, base_score). Unknown keys are an error. Vector fields take
comma-separated numbers.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, fields, replace

from .boosting import TrainConfig
from .datagen import DEFAULT_EIGENVALUES, DEFAULT_MU, DEFAULT_OUTCOME_A

DEFAULT_MASTER_SEED = 3


@dataclass(frozen=True)
class ExperimentConfig:
    n_gen: int = 10000
    n_dup: int = 2000
    n_h: int = 5
    k: int = 5
    mu: tuple = DEFAULT_MU
    eigenvalues: tuple = DEFAULT_EIGENVALUES
    outcome_a: tuple = DEFAULT_OUTCOME_A
    train: TrainConfig = TrainConfig()
    n_sims: int = 30
    n_datasets: int = 100
    n_mc: int = 100000
    master_seed: int = DEFAULT_MASTER_SEED
    scale: float = 1.0

    def __post_init__(self):
        if self.n_gen < 1:
            raise ValueError("n_gen must be >= 1")
        if self.n_dup < 0:
            raise ValueError("n_dup must be >= 0")
        if self.n_dup > self.n_gen * (self.n_h - 1):
            raise ValueError("n_dup exceeds duplication capacity n_gen*(n_h-1)")
        if self.n_h < 1:
            raise ValueError("n_h must be >= 1")
        if self.k < 2:
            raise ValueError("k must be >= 2")
        if self.n_sims < 1 or self.n_datasets < 1 or self.n_mc < 1:
            raise ValueError("n_sims, n_datasets, n_mc must be >= 1")
        if self.scale <= 0.0:
            raise ValueError("scale must be > 0")
        if len(self.mu) != 10 or len(self.eigenvalues) != 10 or len(self.outcome_a) != 8:
            raise ValueError("mu and eigenvalues need 10 entries, outcome_a needs 8")
        object.__setattr__(self, "mu", tuple(float(v) for v in self.mu))
        object.__setattr__(self, "eigenvalues", tuple(float(v) for v in self.eigenvalues))
        object.__setattr__(self, "outcome_a", tuple(float(v) for v in self.outcome_a))

    def scaled(self):
        """Resolve the scale factor into concrete counts (scale becomes 1.0).

        Counts shrink linearly with a floor of 1. Boosting rounds shrink at
        most by half, whatever the scale: shorter runs would cut the learning
        curves before the leakage signal separates from noise.
        """
        if self.scale == 1.0:
            return self
        s = self.scale

        def cnt(v):
            return max(1, round(v * s))

        rounds = max(1, round(self.train.rounds * max(s, 0.5)))
        return replace(
            self,
            n_gen=cnt(self.n_gen),
            n_dup=round(self.n_dup * s),
            n_sims=cnt(self.n_sims),
            n_datasets=cnt(self.n_datasets),
            n_mc=cnt(self.n_mc),
            train=replace(self.train, rounds=rounds),
            scale=1.0,
        )


_TRAIN_KEYS = tuple(f.name for f in fields(TrainConfig))
_TOP_KEYS = tuple(f.name for f in fields(ExperimentConfig) if f.name != "train")
_VECTOR_KEYS = ("mu", "eigenvalues", "outcome_a")
_INT_KEYS = ("n_gen", "n_dup", "n_h", "k", "n_sims", "n_datasets", "n_mc", "master_seed",
             "rounds", "max_depth")


def _parse_value(key, raw):
    if key in _VECTOR_KEYS:
        return tuple(float(v) for v in raw.split(","))
    if key in _INT_KEYS:
        return int(raw)
    return float(raw)


def parse_config(text):
    """Parse a flat key=value document; '#' starts a comment."""
    top = {}
    train_kv = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"line {lineno}: expected key = value")
        key, raw = (part.strip() for part in line.split("=", 1))
        if key in _TRAIN_KEYS:
            train_kv[key] = _parse_value(key, raw)
        elif key in _TOP_KEYS:
            top[key] = _parse_value(key, raw)
        else:
            raise ValueError(f"line {lineno}: unknown key {key!r}")
    return ExperimentConfig(train=TrainConfig(**train_kv), **top)


def load_config(path):
    with open(path, "r", encoding="utf-8") as fh:
        return parse_config(fh.read())


def dump_config(cfg):
    """Canonical text form; stable key order so the hash is reproducible."""
    lines = []
    for key in ("n_gen", "n_dup", "n_h", "k"):
        lines.append(f"{key} = {getattr(cfg, key)}")
    for key in _VECTOR_KEYS:
        lines.append(f"{key} = " + ",".join(format(v, ".17g") for v in getattr(cfg, key)))
    for key in _TRAIN_KEYS:
        v = getattr(cfg.train, key)
        lines.append(f"{key} = {v if isinstance(v, int) else format(v, '.17g')}")
    for key in ("n_sims", "n_datasets", "n_mc", "master_seed"):
        lines.append(f"{key} = {getattr(cfg, key)}")
    lines.append(f"scale = {format(cfg.scale, '.17g')}")
    return "\n".join(lines) + "\n"


def config_hash(cfg):
    return hashlib.sha256(dump_config(cfg).encode("utf-8")).hexdigest()[:16]
