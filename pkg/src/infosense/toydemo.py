"""One-dimensional projections of a two-dimensional Gaussian mixture.

Compares a random direction, the leading principal axis and the
entropy-maximizing (InfoMax) direction by the entropy of the projected
mixture and by the mean squared error of the Bayes least-squares decoder.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass
from importlib import resources

import numpy as np

from .recon import bls_estimate

__all__ = [
    "Gmm2D",
    "angle_sweep",
    "default_mixture",
    "direction",
    "evaluate_scheme",
    "infomax_projection",
    "pca_projection",
    "projection_entropy",
    "toy_summary",
    "write_sweep_csv",
]


@dataclass(frozen=True)
class Gmm2D:
    """Weights ``(K,)``, means ``(K, 2)`` and covariances ``(K, 2, 2)``."""

    weights: np.ndarray
    means: np.ndarray
    covs: np.ndarray

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float)
        mu = np.asarray(self.means, dtype=float)
        cov = np.asarray(self.covs, dtype=float)
        if w.ndim != 1 or mu.shape != (w.size, 2) or cov.shape != (w.size, 2, 2):
            raise ValueError("expected weights (K,), means (K, 2), covs (K, 2, 2)")
        if np.any(w <= 0) or abs(w.sum() - 1.0) > 1e-9:
            raise ValueError("weights must be positive and sum to 1")
        if not np.allclose(cov, np.swapaxes(cov, 1, 2)):
            raise ValueError("covariances must be symmetric")
        if np.any(np.linalg.eigvalsh(cov) <= 0):
            raise ValueError("covariances must be positive definite")
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "means", mu)
        object.__setattr__(self, "covs", cov)

    @classmethod
    def from_dict(cls, data):
        comps = data["components"]
        return cls(
            np.array([c["weight"] for c in comps]),
            np.array([c["mean"] for c in comps]),
            np.array([c["cov"] for c in comps]),
        )

    @classmethod
    def from_json(cls, path):
        with open(path) as fh:
            return cls.from_dict(json.load(fh))

    def to_dict(self):
        return {
            "components": [
                {"weight": float(w), "mean": m.tolist(), "cov": c.tolist()}
                for w, m, c in zip(self.weights, self.means, self.covs)
            ]
        }

    @property
    def mean(self):
        return self.weights @ self.means

    @property
    def covariance(self):
        centered = self.means - self.mean
        within = np.einsum("k,kij->ij", self.weights, self.covs)
        between = np.einsum("k,ki,kj->ij", self.weights, centered, centered)
        return within + between

    def rotated(self, angle):
        c, s = math.cos(angle), math.sin(angle)
        rot = np.array([[c, -s], [s, c]])
        return Gmm2D(self.weights, self.means @ rot.T, rot @ self.covs @ rot.T)

    def sample(self, n, seed=None):
        rng = np.random.default_rng(seed)
        labels = rng.choice(self.weights.size, size=n, p=self.weights)
        chol = np.linalg.cholesky(self.covs)
        z = rng.standard_normal((n, 2))
        return self.means[labels] + np.einsum("nij,nj->ni", chol[labels], z)


def default_mixture():
    """Demo mixture shipped with the package (not the one behind any published table)."""
    text = resources.files("infosense").joinpath("data/default_mixture.json").read_text()
    return Gmm2D.from_dict(json.loads(text))


def direction(theta):
    return np.array([math.cos(theta), math.sin(theta)])


def _check_unit(w):
    w = np.asarray(w, dtype=float)
    if w.shape != (2,) or abs(np.linalg.norm(w) - 1.0) > 1e-9:
        raise ValueError("projection must be a unit 2-vector")
    return w


def projection_entropy(mixture, w, n_grid=2**13):
    """Differential entropy (nats) of ``w . x`` by trapezoidal quadrature.

    The projected density is the 1-D mixture of ``N(w.mu_c, w' Sigma_c w)``;
    the grid spans ten standard deviations beyond every component.
    """
    w = _check_unit(w)
    mu = mixture.means @ w
    sd = np.sqrt(np.einsum("i,kij,j->k", w, mixture.covs, w))
    t = np.linspace((mu - 10 * sd).min(), (mu + 10 * sd).max(), n_grid)
    z = (t[:, None] - mu) / sd
    dens = (mixture.weights / (sd * math.sqrt(2 * math.pi)) * np.exp(-0.5 * z * z)).sum(axis=1)
    integrand = np.where(dens > 0, -dens * np.log(np.where(dens > 0, dens, 1.0)), 0.0)
    return float(np.trapezoid(integrand, t))


def pca_projection(mixture):
    """Leading eigenvector of the mixture covariance."""
    vals, vecs = np.linalg.eigh(mixture.covariance)
    w = vecs[:, np.argmax(vals)]
    return w if w[np.argmax(np.abs(w))] > 0 else -w


def infomax_projection(mixture, n_angles=180, tie_tol=1e-10):
    """Direction in ``[0, pi)`` maximizing :func:`projection_entropy`.

    A uniform grid of ``n_angles`` is searched, then refined once on a grid
    of the same size spanning one coarse step either side of the best
    angle.  Near-ties go to the smallest angle.
    """
    n_angles = int(n_angles)
    if n_angles < 16:
        raise ValueError("need at least 16 angles")
    thetas = np.arange(n_angles) * math.pi / n_angles
    ent = np.array([projection_entropy(mixture, direction(t)) for t in thetas])
    best_idx = int(np.flatnonzero(ent >= ent.max() - tie_tol)[0])
    best_theta, best_h = thetas[best_idx], ent[best_idx]

    step = math.pi / n_angles
    for t in best_theta + np.linspace(-step, step, n_angles):
        h = projection_entropy(mixture, direction(t))
        if h > best_h + tie_tol:
            best_theta, best_h = t, h
    return direction(best_theta % math.pi)


def evaluate_scheme(mixture, w, n_samples=10_000, seed=0):
    """``(entropy, mse)`` of projecting onto ``w`` and decoding with the BLS estimate."""
    if n_samples < 1000:
        raise ValueError("need at least 1000 samples")
    w = _check_unit(w)
    x = mixture.sample(n_samples, seed)
    x_hat = bls_estimate(mixture, w, x @ w)
    mse = float(np.mean(np.sum((x - x_hat) ** 2, axis=1)))
    return projection_entropy(mixture, w), mse


def angle_sweep(mixture, n_angles=64, n_samples=10_000, seed=0):
    """Entropy and BLS MSE on a uniform angle grid over ``[0, pi)``.

    The same samples are reused for every angle.
    """
    thetas = np.arange(n_angles) * math.pi / n_angles
    x = mixture.sample(n_samples, seed)
    ent, mse = [], []
    for t in thetas:
        w = direction(t)
        ent.append(projection_entropy(mixture, w))
        x_hat = bls_estimate(mixture, w, x @ w)
        mse.append(float(np.mean(np.sum((x - x_hat) ** 2, axis=1))))
    return thetas, np.array(ent), np.array(mse)


def toy_summary(mixture, n_samples=10_000, n_random=64, seed=0):
    """Entropy and MSE of random (averaged), PCA and InfoMax projections."""
    rng = np.random.default_rng(seed)
    random_results = [
        evaluate_scheme(mixture, direction(t), n_samples, seed) for t in rng.uniform(0, math.pi, n_random)
    ]
    rand_h, rand_mse = np.mean(random_results, axis=0)
    return {
        "random": (float(rand_h), float(rand_mse)),
        "pca": evaluate_scheme(mixture, pca_projection(mixture), n_samples, seed),
        "infomax": evaluate_scheme(mixture, infomax_projection(mixture), n_samples, seed),
    }


def write_sweep_csv(fh, thetas, entropies, mses, comment=None):
    if comment:
        fh.write(f"# {comment}\n")
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(["theta", "entropy_nats", "mse"])
    for row in zip(thetas, entropies, mses):
        writer.writerow([repr(float(v)) for v in row])
