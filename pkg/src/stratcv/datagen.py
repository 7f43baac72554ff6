"""Synthetic data generating process.

Covariates x1..x9 follow a dense multivariate gaussian whose covariance is a
fixed eigenvalue spectrum rotated by a random orthogonal matrix; x10 is
gaussian and independent of everything else. The binary outcome follows a
logistic model whose log-odds mixes linear, interaction, squared and
indicator-gated terms, so the decision boundary is strongly non-linear.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import expit

N_COVARIATES = 10

DEFAULT_EIGENVALUES = (1.0, 1.2, 1.4, 1.6, 1.8, 2.0, 2.2, 2.4, 2.6, 2.8)
DEFAULT_MU = (0.0,) * N_COVARIATES
DEFAULT_OUTCOME_A = (-2.0, 0.4, 0.8, 1.2, 0.4, 1.2, 3.0, 2.0)


@dataclass(frozen=True)
class CovarianceSpec:
    """Eigenvalues for all ten covariates plus the 9x9 eigenbasis of x1..x9."""

    eigenvalues: np.ndarray
    orthogonal: np.ndarray

    def __post_init__(self):
        lam = np.asarray(self.eigenvalues, dtype=np.float64)
        orth = np.asarray(self.orthogonal, dtype=np.float64)
        if lam.shape != (N_COVARIATES,):
            raise ValueError(f"expected {N_COVARIATES} eigenvalues, got shape {lam.shape}")
        if not np.all(lam > 0.0):
            raise ValueError("eigenvalues must be strictly positive")
        if orth.shape != (N_COVARIATES - 1, N_COVARIATES - 1):
            raise ValueError(f"expected 9x9 orthogonal matrix, got shape {orth.shape}")
        resid = np.abs(orth.T @ orth - np.eye(N_COVARIATES - 1)).max()
        if resid > 1e-10:
            raise ValueError(f"matrix is not orthogonal (max |O'O - I| = {resid:.3g})")
        object.__setattr__(self, "eigenvalues", lam)
        object.__setattr__(self, "orthogonal", orth)


@dataclass(frozen=True)
class Covariance:
    """A 10x10 covariance together with its lower Cholesky factor."""

    sigma: np.ndarray
    chol: np.ndarray


@dataclass(frozen=True)
class OutcomeParams:
    """Coefficients a0..a7 of the log-odds model."""

    a: np.ndarray

    def __post_init__(self):
        a = np.asarray(self.a, dtype=np.float64)
        if a.shape != (8,):
            raise ValueError(f"expected 8 coefficients a0..a7, got shape {a.shape}")
        if not np.all(np.isfinite(a)):
            raise ValueError("coefficients must be finite")
        object.__setattr__(self, "a", a)


@dataclass(frozen=True)
class Records:
    """A batch of generated records, columnar: one row per record."""

    x: np.ndarray
    y: np.ndarray
    individual_id: np.ndarray

    def __len__(self):
        return self.x.shape[0]


def build_orthogonal(dim, rng):
    """Draw a Haar-uniform dim x dim orthogonal matrix.

    QR of a standard gaussian matrix, with column signs fixed so the
    triangular factor has a positive diagonal; without the sign fix the
    distribution depends on the QR implementation and is not Haar.
    """
    if dim < 1:
        raise ValueError("dim must be >= 1")
    z = rng.standard_normal((dim, dim))
    q, r = np.linalg.qr(z)
    signs = np.where(np.diag(r) < 0.0, -1.0, 1.0)
    return q * signs


def build_covariance(spec):
    """Assemble the block covariance: rotated 9x9 spectrum, then lambda10 alone.

    Sigma' = O diag(lam1..lam9) O' occupies the leading block; x10 gets
    variance lam10 and zero covariance with everything else.
    """
    lam = spec.eigenvalues
    block = spec.orthogonal @ np.diag(lam[:-1]) @ spec.orthogonal.T
    block = 0.5 * (block + block.T)  # kill asymmetric rounding residue
    sigma = np.zeros((N_COVARIATES, N_COVARIATES))
    sigma[:-1, :-1] = block
    sigma[-1, -1] = lam[-1]
    chol = np.linalg.cholesky(sigma)
    return Covariance(sigma=sigma, chol=chol)


def sample_covariates(cov, mu, n, rng):
    """Sample n covariate vectors: mu + L z with z iid standard normal."""
    if n < 0:
        raise ValueError("n must be >= 0")
    mu = np.asarray(mu, dtype=np.float64)
    z = rng.standard_normal((n, cov.sigma.shape[0]))
    return mu + z @ cov.chol.T


def log_odds(x, params):
    """Log-odds of a positive outcome; vectorized over rows of x.

    a0 + a1 x1 + a2 x2 + a3 x3 + a4 x1 x2
       + a5 x3 I(x4>0) + a6 x5^2 I(x6>0) + a7 x7 I(x8 x9 > 0)

    Indicators are strict: I(0>0) is false. x10 never enters.
    """
    x = np.asarray(x, dtype=np.float64)
    single = x.ndim == 1
    pts = np.atleast_2d(x)
    a0, a1, a2, a3, a4, a5, a6, a7 = params.a
    x1, x2, x3 = pts[:, 0], pts[:, 1], pts[:, 2]
    x4, x5, x6 = pts[:, 3], pts[:, 4], pts[:, 5]
    x7, x8, x9 = pts[:, 6], pts[:, 7], pts[:, 8]
    lo = (
        a0
        + a1 * x1
        + a2 * x2
        + a3 * x3
        + a4 * x1 * x2
        + a5 * x3 * (x4 > 0.0)
        + a6 * x5 ** 2 * (x6 > 0.0)
        + a7 * x7 * (x8 * x9 > 0.0)
    )
    return float(lo[0]) if single else lo


def sample_outcome(lo, rng):
    """Bernoulli draw with P(1) = sigmoid(lo); vectorized over lo."""
    lo = np.asarray(lo, dtype=np.float64)
    p = expit(lo)
    return (rng.random(lo.shape) < p).astype(np.int8)


def generate_records(cov, mu, params, n, rng):
    """Sample a fresh batch of n records with individual ids 0..n-1."""
    x = sample_covariates(cov, mu, n, rng)
    y = sample_outcome(log_odds(x, params), rng)
    return Records(x=x, y=y, individual_id=np.arange(n, dtype=np.int64))


def optimal_accuracy(cov, mu, params, n_mc, rng):
    """Monte Carlo estimate of the best achievable accuracy.

    The Bayes classifier predicts the likelier class, so its accuracy is
    E[max(p1, 1-p1)] over the covariate distribution.
    """
    if n_mc < 1:
        raise ValueError("n_mc must be >= 1")
    x = sample_covariates(cov, mu, n_mc, rng)
    p1 = expit(log_odds(x, params))
    return float(np.mean(np.maximum(p1, 1.0 - p1)))
