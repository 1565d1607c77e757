"""Entropy of p-dimensional projections: closed forms and an empirical check.

Closed forms cover three source families in ``d`` dimensions:

* white GG sources (iid ``GG(alpha)`` components after an orthonormal
  mixing), for which random projections lose ``p(p-1)/(d-1) (c2 - c_alpha)``
  nats against a Gaussian and PCA keeps exactly ``p * c_alpha``;
* Gaussian sources with power-law spectrum ``lambda_k = k**-gamma``,
  where the random-projection variance term is the log of an expected
  sub-volume (an elementary symmetric polynomial, see
  :func:`log_subvolume_expectation`);
* the sparse power-law hybrid, approximated by adding the two gaps.

The white random-projection formula uses ``p*c2 - ...``.  A ``+`` sign would
push the entropy of a unit-covariance vector above the Gaussian bound and
break ``h(y_1..y_d) = d * c_alpha`` at ``p == d``.
"""

from __future__ import annotations

import csv
import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy import special
from scipy.spatial import cKDTree

from .ggdist import GAUSSIAN_SHAPE_TERM, GGParams, gg_sample, shape_term

__all__ = [
    "DuplicatePointsWarning",
    "EntropyCurve",
    "empirical_projection_entropy",
    "hybrid_gap",
    "individual_capacity",
    "knn_entropy",
    "log_elementary_symmetric",
    "log_subvolume_expectation",
    "pca_entropy_gaussian_powerlaw",
    "pca_entropy_white",
    "power_law_spectrum",
    "random_entropy_gaussian_powerlaw",
    "random_entropy_white",
    "random_orthonormal_rows",
    "subvolume_expectation",
    "write_curves_csv",
]

C2 = GAUSSIAN_SHAPE_TERM


class DuplicatePointsWarning(UserWarning):
    """Coincident samples were jittered before the nearest-neighbor search."""


def _as_counts(p, lo, hi, name="p"):
    arr = np.asarray(p)
    if not np.issubdtype(arr.dtype, np.integer):
        if not np.all(arr == np.round(arr)):
            raise ValueError(f"{name} must be integral")
        arr = arr.astype(np.int64)
    if np.any(arr < lo) or (hi is not None and np.any(arr > hi)):
        raise ValueError(f"{name} must lie in [{lo}, {hi}], got {p}")
    return arr


def _scalar_or_array(values, like):
    return float(values) if np.ndim(like) == 0 else np.asarray(values, dtype=float)


# --------------------------------------------------------------------------
# nonparametric estimate


def knn_entropy(samples, k_neighbors=3, seed=0):
    """Kozachenko-Leonenko differential entropy estimate in nats.

    ``h = psi(N) - psi(k) + ln V_p + (p/N) sum_i ln eps_i`` where ``eps_i`` is
    the Euclidean distance from sample ``i`` to its ``k``-th nearest neighbor
    (exact kd-tree search) and ``V_p`` the volume of the unit ``p``-ball.

    Exactly coincident samples would give ``ln 0``; they are separated by a
    tiny deterministic jitter and a :class:`DuplicatePointsWarning` is issued.
    """
    x = np.asarray(samples, dtype=float)
    if x.ndim == 1:
        x = x[:, None]
    n, dim = x.shape
    k = int(k_neighbors)
    if n < 50:
        raise ValueError(f"need at least 50 samples, got {n}")
    if k < 1 or k >= n:
        raise ValueError(f"k_neighbors must be in [1, {n - 1}]")

    tree = cKDTree(x)
    dist, _ = tree.query(x, k=k + 1, workers=-1)
    eps = dist[:, -1]
    if np.any(eps <= 0.0):
        warnings.warn(
            f"{int(np.sum(eps <= 0))} samples have {k} or more exact duplicates; jittering",
            DuplicatePointsWarning,
            stacklevel=2,
        )
        scale = np.std(x, axis=0).max() or 1.0
        rng = np.random.default_rng(seed)
        x = x + 1e-10 * scale * rng.standard_normal(x.shape)
        dist, _ = cKDTree(x).query(x, k=k + 1, workers=-1)
        eps = dist[:, -1]

    log_unit_ball = 0.5 * dim * math.log(math.pi) - special.gammaln(0.5 * dim + 1.0)
    return float(special.digamma(n) - special.digamma(k) + log_unit_ball + dim * np.mean(np.log(eps)))


def random_orthonormal_rows(p, d, rng):
    """A ``p x d`` matrix with orthonormal rows, uniform on the Stiefel manifold."""
    if not 1 <= p <= d:
        raise ValueError(f"need 1 <= p <= d, got p={p}, d={d}")
    q, r = np.linalg.qr(rng.standard_normal((d, p)))
    # sign fix makes the distribution exactly Haar
    q = q * np.sign(np.diag(r))
    return q.T


def empirical_projection_entropy(alpha, d, p, n_samples=100_000, seed=0, k_neighbors=3):
    """kNN entropy of ``W s`` for one random orthonormal ``W`` and iid GG ``s``.

    The orthonormal source mixing is irrelevant here (a random ``W`` composed
    with any fixed orthonormal ``V`` is again uniformly random), so the
    components are sampled directly.
    """
    rng = np.random.default_rng(seed)
    w = random_orthonormal_rows(p, d, rng)
    s = gg_sample(GGParams(alpha), n_samples * d, seed=rng).reshape(n_samples, d)
    return knn_entropy(s @ w.T, k_neighbors=k_neighbors)


# --------------------------------------------------------------------------
# white GG sources


def random_entropy_white(alpha, d, p):
    """Expected entropy of ``p`` random orthonormal projections of a white GG source."""
    d = int(d)
    if d < 2:
        raise ValueError("d must be at least 2")
    pp = _as_counts(p, 1, d)
    gap = C2 - shape_term(alpha)
    values = pp * C2 - pp * (pp - 1) / (d - 1) * gap
    return _scalar_or_array(values, p)


def pca_entropy_white(alpha, p):
    """Entropy of ``p`` PCA (or ICA) projections of a white GG source: ``p * c_alpha``."""
    pp = _as_counts(p, 1, None)
    return _scalar_or_array(pp * shape_term(alpha), p)


def individual_capacity(alpha, d, k):
    """Expected conditional entropy added by the ``k``-th random projection.

    Falls linearly from ``c2`` at ``k = 1`` to ``2 c_alpha - c2`` at ``k = d``;
    the ``d`` values sum to ``d * c_alpha``.
    """
    d = int(d)
    if d < 2:
        raise ValueError("d must be at least 2")
    kk = _as_counts(k, 1, d, name="k")
    values = C2 - 2.0 * (kk - 1) / (d - 1) * (C2 - shape_term(alpha))
    return _scalar_or_array(values, k)


# --------------------------------------------------------------------------
# expected sub-volumes


def _log_esp_logdomain(log_lam, p_max):
    out = np.full(p_max + 1, -np.inf)
    out[0] = 0.0
    for j, ll in enumerate(log_lam):
        top = min(j + 1, p_max)
        out[1 : top + 1] = np.logaddexp(out[1 : top + 1], out[:top] + ll)
    return out


def _log_esp_scaled(lam, log_lam, p_max, check_every=16, big=1e150):
    # S_k = a_k * exp(o_k); a_k only grows, so it is renormalized when large.
    # ratio[k] = exp(o_{k-1} - o_k) carries the offsets into the recursion
    # S_k(m) = S_k(m-1) + lam_m * S_{k-1}(m-1).
    a = np.zeros(p_max + 1)
    a[0] = 1.0
    offset = np.zeros(p_max + 1)
    ratio = np.ones(p_max + 1)
    for j in range(lam.size):
        m = j + 1
        top = min(m, p_max)
        if m <= p_max:
            offset[m] = offset[m - 1] + log_lam[j]
            ratio[m] = 1.0 / lam[j]
        a[1 : top + 1] += lam[j] * a[:top] * ratio[1 : top + 1]
        if m <= p_max or j % check_every == 0:
            big_idx = np.flatnonzero(a[1 : top + 1] > big) + 1
            if big_idx.size:
                offset[big_idx] += np.log(a[big_idx])
                a[big_idx] = 1.0
                ratio[1 : top + 1] = np.exp(offset[:top] - offset[1 : top + 1])
    with np.errstate(divide="ignore"):
        return offset + np.log(a)


def log_elementary_symmetric(lambdas, p_max):
    """``ln S_k`` for ``k = 0..p_max``, ``S_k`` the k-th elementary symmetric polynomial.

    Runs the recursion ``S_k(m) = S_k(m-1) + lambda_m S_{k-1}(m-1)`` (the
    telescoped form of ``S_p(m) = sum_{j=p..m} S_{p-1}(j-1) lambda_j``) in
    O(d * p_max) time and O(p_max) memory without under- or overflow.
    """
    lam = np.asarray(lambdas, dtype=float).ravel()
    if lam.size == 0:
        raise ValueError("need at least one lambda")
    if not np.all(np.isfinite(lam)) or np.any(lam <= 0):
        raise ValueError("lambdas must be positive and finite")
    p_max = int(p_max)
    if not 0 <= p_max <= lam.size:
        raise ValueError(f"p_max must be in [0, {lam.size}]")
    log_lam = np.log(lam)
    if np.ptp(log_lam) > 600.0:
        # offset ratios could overflow; fall back to log-sum-exp per cell
        return _log_esp_logdomain(log_lam, p_max)
    return _log_esp_scaled(lam, log_lam, p_max)


def log_subvolume_expectation(lambdas, p):
    """``ln E[Vol_p] = ln S_p - ln C(d, p)``: the mean log-volume of random p-subsets.

    ``p`` may be an int or an array of ints; the recursion runs once up to
    ``max(p)``.
    """
    lam = np.asarray(lambdas, dtype=float).ravel()
    d = lam.size
    pp = _as_counts(p, 1, d)
    log_s = log_elementary_symmetric(lam, int(np.max(pp)))
    return _scalar_or_array(log_s[pp] - _log_binomial(d, pp), p)


def _log_binomial(d, k):
    # a running sum of ln((d - i) / (i + 1)) avoids the cancellation between
    # large log-gamma values
    k = np.minimum(k, d - k)
    i = np.arange(int(np.max(k)))
    table = np.concatenate([[0.0], np.cumsum(np.log(d - i) - np.log1p(i))])
    return table[k]


def subvolume_expectation(lambdas, p):
    """Average over all ``p``-subsets of the product of the chosen ``lambdas``.

    May underflow to 0 for long spectra; use :func:`log_subvolume_expectation`.
    """
    return np.exp(log_subvolume_expectation(lambdas, p)) if np.ndim(p) else math.exp(
        log_subvolume_expectation(lambdas, p)
    )


# --------------------------------------------------------------------------
# power-law Gaussian and hybrid sources


def power_law_spectrum(gamma, d):
    """``lambda_k = k**-gamma`` for ``k = 1..d``."""
    if gamma < 0:
        raise ValueError("gamma must be non-negative")
    return np.arange(1, int(d) + 1, dtype=float) ** (-float(gamma))


def random_entropy_gaussian_powerlaw(gamma, d, p):
    """Expected entropy of ``p`` random projections of a power-law Gaussian."""
    pp = _as_counts(p, 1, int(d))
    values = pp * C2 + 0.5 * np.asarray(log_subvolume_expectation(power_law_spectrum(gamma, d), pp))
    return _scalar_or_array(values, p)


def pca_entropy_gaussian_powerlaw(gamma, p):
    """Entropy of the first ``p`` principal components: ``p c2 - gamma/2 ln p!``."""
    if gamma < 0:
        raise ValueError("gamma must be non-negative")
    pp = _as_counts(p, 1, None)
    values = pp * C2 - 0.5 * gamma * special.gammaln(pp + 1.0)
    return _scalar_or_array(values, p)


def hybrid_gap(alpha, gamma, d, p):
    """Random-minus-PCA entropy for a sparse power-law source ``GG(alpha, 0, k**-gamma)``.

    Approximated as the sum of the white GG gap and the power-law Gaussian gap.
    Positive values favor random projections.
    """
    white = np.asarray(random_entropy_white(alpha, d, p)) - np.asarray(pca_entropy_white(alpha, p))
    colored = np.asarray(random_entropy_gaussian_powerlaw(gamma, d, p)) - np.asarray(
        pca_entropy_gaussian_powerlaw(gamma, p)
    )
    return _scalar_or_array(white + colored, p)


# --------------------------------------------------------------------------
# curves


@dataclass(frozen=True)
class EntropyCurve:
    """Entropies in nats of one projection scheme at several ``p``."""

    scheme: str
    p_values: tuple
    entropies: tuple

    def __post_init__(self):
        if len(self.p_values) != len(self.entropies):
            raise ValueError("p_values and entropies differ in length")
        if not all(math.isfinite(e) for e in self.entropies):
            raise ValueError("entropies must be finite")

    @classmethod
    def from_arrays(cls, scheme, p_values, entropies):
        return cls(
            scheme,
            tuple(int(p) for p in np.ravel(p_values)),
            tuple(float(e) for e in np.ravel(entropies)),
        )

    def rows(self):
        for p, h in zip(self.p_values, self.entropies):
            yield p, self.scheme, h


def write_curves_csv(curves, fh, comment=None):
    """Write curves as ``p,scheme,entropy_nats`` rows, optionally after a ``# comment`` line."""
    if comment:
        fh.write(f"# {comment}\n")
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(["p", "scheme", "entropy_nats"])
    for curve in curves:
        for p, scheme, h in curve.rows():
            writer.writerow([p, scheme, repr(h)])
