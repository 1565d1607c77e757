"""Multi-resolution source models, capacity diagrams and sensor allocation.

A model groups ``d`` independent components into octave bands ``0..L``.
Components of band ``l`` are iid ``GG(alpha)`` with variance ``lambda_l``.
For random orthonormal mixing restricted to a single band, the capacity of
the ``k``-th projection falls linearly (see
:func:`infosense.entropy.individual_capacity`); the capacity diagram puts
those ramps for all bands side by side, offset by ``0.5 * ln(lambda_l)``,
and the best ``p`` bandwise projections are the ``p`` largest entries.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, replace

import numpy as np

from .ggdist import GAUSSIAN_SHAPE_TERM, noisy_shape_term, shape_term

__all__ = [
    "Allocation",
    "BandSpec",
    "CapacityDiagram",
    "MultiResModel",
    "ThresholdPlan",
    "allocate",
    "apply_threshold_rule",
    "band_labels",
    "capacity_diagram",
    "natural_image_model",
    "noisy_model",
]

C2 = GAUSSIAN_SHAPE_TERM


@dataclass(frozen=True)
class BandSpec:
    level: int
    size: int
    variance: float

    def __post_init__(self):
        if self.size < 1:
            raise ValueError(f"band {self.level} is empty")
        if not (self.variance > 0 and math.isfinite(self.variance)):
            raise ValueError(f"band {self.level} variance must be positive, got {self.variance}")


@dataclass(frozen=True)
class MultiResModel:
    """Bands ordered by level with non-increasing variances.

    ``side`` is the image side length when the bands are DCT shells of an
    ``side x side`` image (``None`` for abstract models).  ``shape_terms``
    overrides the per-band shape term ``c_alpha``; it is set by
    :func:`noisy_model` together with ``noise_sigma``.
    """

    bands: tuple
    alpha: float
    side: int | None = None
    shape_terms: tuple | None = None
    noise_sigma: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "bands", tuple(self.bands))
        if not self.bands:
            raise ValueError("model needs at least one band")
        if [b.level for b in self.bands] != list(range(len(self.bands))):
            raise ValueError("band levels must run 0..L contiguously")
        var = self.variances
        if np.any(np.diff(var) > 1e-12 * var[:-1]):
            raise ValueError("band variances must be non-increasing with level")
        if self.shape_terms is not None:
            object.__setattr__(self, "shape_terms", tuple(float(c) for c in self.shape_terms))
            if len(self.shape_terms) != len(self.bands):
                raise ValueError("one shape term per band required")
        if self.side is not None and self.side * self.side != self.total_dim:
            raise ValueError("band sizes do not tile the image")
        shape_term(self.alpha)  # validates alpha

    @property
    def n_bands(self):
        return len(self.bands)

    @property
    def total_dim(self):
        return sum(b.size for b in self.bands)

    @property
    def sizes(self):
        return np.array([b.size for b in self.bands], dtype=np.int64)

    @property
    def variances(self):
        return np.array([b.variance for b in self.bands], dtype=float)

    @property
    def band_shape_terms(self):
        if self.shape_terms is None:
            return np.full(self.n_bands, shape_term(self.alpha))
        return np.array(self.shape_terms)

    def with_variances(self, variances):
        """Same partition with new per-band variances (e.g. calibrated to an image)."""
        variances = np.asarray(variances, dtype=float)
        if variances.shape != (self.n_bands,):
            raise ValueError(f"expected {self.n_bands} variances")
        bands = tuple(replace(b, variance=float(v)) for b, v in zip(self.bands, variances))
        return replace(self, bands=bands, shape_terms=None, noise_sigma=0.0)

    def scaled(self, factor):
        return self.with_variances(self.variances * float(factor))


def _dyadic_log2(n):
    m = int(n).bit_length() - 1
    if n < 1 or (1 << m) != n:
        raise ValueError(f"{n} is not a power of two")
    return m


def band_labels(side):
    """Octave band of every coefficient of a ``side x side`` 2-D DCT.

    With radial index ``r = sqrt(kx**2 + ky**2)``, band 0 is the DC term,
    band ``l`` holds ``2**(l-1) <= r < 2**l`` and the top band
    ``log2(side)`` also takes the corner coefficients with ``r >= side``.
    """
    levels = _dyadic_log2(side)
    k = np.arange(side)
    r = np.hypot(k[:, None], k[None, :])
    labels = np.zeros((side, side), dtype=np.int64)
    nonzero = r >= 1.0
    labels[nonzero] = np.floor(np.log2(r[nonzero])).astype(np.int64) + 1
    # guard the floor at exact powers of two against rounding
    labels[nonzero & (r < 2.0 ** (labels - 1))] -= 1
    labels[nonzero & (r >= 2.0**labels)] += 1
    return np.minimum(labels, levels)


def natural_image_model(width, height, alpha, lambda0=1.0):
    """Octave-band model of ``width x height`` images with ``lambda_l = lambda0 / 4**l``."""
    if width != height:
        raise ValueError("only square images are supported")
    m = _dyadic_log2(width)
    if m < 3:
        raise ValueError("image side must be at least 8")
    counts = np.bincount(band_labels(width).ravel(), minlength=m + 1)
    bands = tuple(BandSpec(level, int(n), lambda0 / 4.0**level) for level, n in enumerate(counts))
    return MultiResModel(bands, float(alpha), side=int(width))


def noisy_model(model, sigma):
    """The model of ``x + eta`` for white Gaussian ``eta`` with standard deviation ``sigma``.

    Independent components are unchanged; each band's variance grows by
    ``sigma**2`` and its shape term becomes the noisy shape term at
    ``snr = lambda_l / sigma**2``.
    """
    sigma = float(sigma)
    if not sigma >= 0.0:
        raise ValueError(f"sigma must be non-negative, got {sigma}")
    if sigma == 0.0:
        return model
    if model.noise_sigma > 0.0:
        raise ValueError("model already includes measurement noise")
    noise_var = sigma * sigma
    shapes = tuple(noisy_shape_term(model.alpha, b.variance / noise_var) for b in model.bands)
    bands = tuple(replace(b, variance=b.variance + noise_var) for b in model.bands)
    return replace(model, bands=bands, shape_terms=shapes, noise_sigma=sigma)


@dataclass(frozen=True)
class CapacityDiagram:
    """Individual capacities of bandwise random projections.

    Parallel arrays ``band``, ``k`` (1-based within the band) and ``nu``
    (nats), ordered by band then ``k``.
    """

    band: np.ndarray
    k: np.ndarray
    nu: np.ndarray
    band_sizes: tuple
    sigma: float = 0.0

    @property
    def n_bands(self):
        return len(self.band_sizes)

    @property
    def size(self):
        return int(self.nu.size)

    def descending_order(self):
        """Entry indices by decreasing ``nu``; ties go to lower band, then lower ``k``."""
        return np.lexsort((self.k, self.band, -self.nu))

    def band_values(self, level):
        return self.nu[self.band == level]

    def write_csv(self, fh, comment=None):
        """``global_index,band,k,nu_nats`` rows in descending-capacity order."""
        if comment:
            fh.write(f"# {comment}\n")
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["global_index", "band", "k", "nu_nats"])
        for rank, idx in enumerate(self.descending_order(), start=1):
            writer.writerow([rank, int(self.band[idx]), int(self.k[idx]), repr(float(self.nu[idx]))])


def capacity_diagram(model, sigma=0.0):
    """Capacity diagram of ``model`` observed with noise of standard deviation ``sigma``.

    Entry ``k`` of band ``l`` is
    ``c2 + 0.5 ln(lambda'_l) - 2 (k-1)/(|B_l|-1) (c2 - c'_l)`` with the noisy
    variance ``lambda'_l`` and shape term ``c'_l``.  Single-coefficient bands
    contribute ``c'_l + 0.5 ln(lambda'_l)``.
    """
    eff = noisy_model(model, sigma)
    shapes = eff.band_shape_terms
    bands, ks, nus = [], [], []
    for spec, c in zip(eff.bands, shapes):
        k = np.arange(1, spec.size + 1)
        offset = 0.5 * math.log(spec.variance)
        if spec.size == 1:
            nu = np.array([c + offset])
        else:
            nu = C2 + offset - 2.0 * (k - 1) / (spec.size - 1) * (C2 - c)
        bands.append(np.full(spec.size, spec.level))
        ks.append(k)
        nus.append(nu)
    return CapacityDiagram(
        band=np.concatenate(bands),
        k=np.concatenate(ks),
        nu=np.concatenate(nus),
        band_sizes=tuple(int(s) for s in model.sizes),
        sigma=float(sigma),
    )


@dataclass(frozen=True)
class Allocation:
    """Number of projections ``p_l`` given to each band."""

    per_band: tuple

    def __post_init__(self):
        object.__setattr__(self, "per_band", tuple(int(n) for n in self.per_band))
        if any(n < 0 for n in self.per_band):
            raise ValueError("negative band allocation")

    @property
    def total(self):
        return sum(self.per_band)

    def cumulative(self):
        """``sum_{l' <= l} p_l'`` for every ``l``."""
        return np.cumsum(self.per_band)


def allocate(diagram, p):
    """Select the ``p`` largest capacities and count them per band."""
    p = int(p)
    if not 1 <= p <= diagram.size:
        raise ValueError(f"p must be in [1, {diagram.size}], got {p}")
    chosen = diagram.descending_order()[:p]
    counts = np.bincount(diagram.band[chosen], minlength=diagram.n_bands)
    return Allocation(tuple(int(c) for c in counts))


@dataclass(frozen=True)
class ThresholdPlan:
    """How an allocation is realized with deterministic and mixed rows.

    ``full_bands`` are captured coefficient by coefficient, ``skipped_bands``
    are not measured, and ``residual_random_count`` rows mix all
    coefficients of ``mixed_bands`` jointly.
    """

    full_bands: frozenset
    skipped_bands: frozenset
    mixed_bands: frozenset
    residual_random_count: int
    total: int


def apply_threshold_rule(allocation, model, upper=0.9, lower=0.1):
    """Round an allocation to whole bands where it is nearly full or nearly empty.

    Bands with ``p_l > upper * |B_l|`` are taken completely, bands with
    ``p_l < lower * |B_l|`` are dropped, and the remaining budget
    ``p - sum_full |B_l|`` becomes one random block across all other bands.

    Two corner cases are repaired so that the block stays realizable: if
    promoting bands overspends the budget, the highest promoted bands are
    demoted back into the mixed pool; if the pool is smaller than the
    residual, the lowest dropped bands rejoin it.
    """
    per_band = np.asarray(allocation.per_band)
    sizes = model.sizes
    if per_band.shape != sizes.shape:
        raise ValueError("allocation and model have different band counts")
    if np.any(per_band > sizes):
        raise ValueError("allocation exceeds a band size")
    p = int(per_band.sum())

    full = {l for l in range(len(sizes)) if per_band[l] > upper * sizes[l]}
    skipped = {l for l in range(len(sizes)) if per_band[l] < lower * sizes[l]}
    mixed = set(range(len(sizes))) - full - skipped

    def residual():
        return p - int(sum(sizes[l] for l in full))

    while residual() < 0:
        demote = max(l for l in full if per_band[l] < sizes[l])
        full.remove(demote)
        mixed.add(demote)
    while residual() > int(sum(sizes[l] for l in mixed)):
        rejoin = min(skipped)
        skipped.remove(rejoin)
        mixed.add(rejoin)
    r = residual()
    if r == 0:
        skipped |= mixed
        mixed = set()
    assert r >= 0 and r <= sum(sizes[l] for l in mixed)
    return ThresholdPlan(frozenset(full), frozenset(skipped), frozenset(mixed), r, p)
