"""Grayscale image I/O, synthesis from a band model and band calibration.

Images are 2-D float arrays.  Files are binary 8-bit PGM (P5).
"""

from __future__ import annotations

import math
import re

import numpy as np

from .ggdist import GGParams, estimate_alpha, gg_sample
from .model import band_labels
from .operators import dct2_forward, dct2_inverse, haar2_forward, haar2_inverse, haar_subbands

__all__ = [
    "band_variances",
    "calibrated_model",
    "estimate_image_alpha",
    "fit_band_variances",
    "haar_detail_coefficients",
    "read_pgm",
    "synthesize_image",
    "write_pgm",
]

_PGM_HEADER = re.compile(rb"^P5\s+(?:#[^\n]*\n\s*)*(\d+)\s+(?:#[^\n]*\n\s*)*(\d+)\s+(?:#[^\n]*\n\s*)*(\d+)\s")


def read_pgm(path):
    """Read a binary 8-bit PGM file as a float array."""
    with open(path, "rb") as fh:
        data = fh.read()
    m = _PGM_HEADER.match(data)
    if m is None:
        raise ValueError(f"{path}: not a binary PGM (P5) file")
    width, height, maxval = (int(g) for g in m.groups())
    if not 0 < maxval < 256:
        raise ValueError(f"{path}: only 8-bit PGM is supported (maxval {maxval})")
    pixels = np.frombuffer(data, dtype=np.uint8, count=width * height, offset=m.end())
    if pixels.size != width * height:
        raise ValueError(f"{path}: truncated pixel data")
    return pixels.reshape(height, width).astype(float)


def write_pgm(path, image, peak=255):
    """Write ``image`` as 8-bit PGM, rounding and clamping to ``[0, peak]``."""
    image = np.asarray(image, dtype=float)
    if image.ndim != 2:
        raise ValueError("expected a 2-D image")
    if not 0 < peak < 256:
        raise ValueError("peak must be in 1..255")
    pixels = np.clip(np.rint(np.nan_to_num(image)), 0, peak).astype(np.uint8)
    with open(path, "wb") as fh:
        fh.write(f"P5\n{image.shape[1]} {image.shape[0]}\n{int(peak)}\n".encode("ascii"))
        fh.write(pixels.tobytes())


def synthesize_image(model, seed=None, mean=128.0, basis="haar"):
    """Draw an image whose coefficients follow ``model``.

    Band ``l`` coefficients are iid ``GG(alpha)`` with variance
    ``lambda_l``; the DC term is fixed so the image mean is ``mean``.
    With ``basis="haar"`` the bands are the Haar detail levels (band
    ``l >= 1`` holds the level whose subbands are ``2**(l-1)`` wide); with
    ``basis="dct"`` they are the DCT octave shells of :func:`band_labels`.
    """
    if model.side is None:
        raise ValueError("model is not tied to an image size")
    rng = np.random.default_rng(seed)
    side = model.side
    variances = model.variances
    if basis == "dct":
        labels = band_labels(side)
        scale = np.sqrt(variances[labels])
        coeffs = gg_sample(GGParams(model.alpha), labels.size, rng).reshape(side, side) * scale
        coeffs[0, 0] = mean * side
        return dct2_inverse(coeffs)
    if basis != "haar":
        raise ValueError(f"unknown basis {basis!r}")
    coeffs = np.zeros((side, side))
    coeffs[0, 0] = mean * side
    top = model.n_bands - 1
    for level, _, sub in haar_subbands(coeffs):
        band = top - level + 1
        draw = gg_sample(GGParams(model.alpha, sigma=math.sqrt(variances[band])), sub.size, rng)
        sub[...] = draw.reshape(sub.shape)
    return haar2_inverse(coeffs)


def band_variances(image):
    """Mean squared orthonormal DCT coefficient over each octave band."""
    coeffs = dct2_forward(image)
    labels = band_labels(coeffs.shape[0]).ravel()
    sums = np.bincount(labels, weights=coeffs.ravel() ** 2)
    return sums / np.bincount(labels)


def fit_band_variances(variances):
    """Least-squares fit of ``lambda0 / 4**l`` to the AC bands in the log domain.

    The DC band is excluded from the fit since it carries the image mean.
    """
    variances = np.asarray(variances, dtype=float)
    levels = np.arange(variances.size)
    ac = variances[1:]
    if np.any(ac <= 0):
        raise ValueError("band variances must be positive to fit")
    log_lambda0 = np.mean(np.log(ac) + levels[1:] * math.log(4.0))
    return np.exp(log_lambda0) / 4.0**levels


def calibrated_model(model, image, mode="fitted"):
    """``model`` with band variances measured from ``image``.

    ``mode="raw"`` uses the empirical shell variances, made non-increasing
    by a running minimum; ``mode="fitted"`` uses the fitted power law.
    """
    raw = band_variances(image)
    if mode == "raw":
        variances = np.minimum.accumulate(raw)
    elif mode == "fitted":
        variances = fit_band_variances(raw)
    else:
        raise ValueError(f"unknown calibration mode {mode!r}")
    return model.with_variances(np.maximum(variances, 1e-12 * variances.max()))


def haar_detail_coefficients(image, min_size=64):
    """Pooled Haar detail coefficients, each subband divided by its RMS.

    Subbands with fewer than ``min_size`` coefficients or zero energy are
    skipped.
    """
    pooled = []
    for _, _, sub in haar_subbands(haar2_forward(image)):
        if sub.size < min_size:
            continue
        rms = math.sqrt(float(np.mean(sub * sub)))
        if rms > 0:
            pooled.append(sub.ravel() / rms)
    if not pooled:
        raise ValueError("image has no non-constant Haar detail subbands")
    return np.concatenate(pooled)


def estimate_image_alpha(image, min_size=64):
    """Shape parameter of an image's Haar detail coefficients."""
    return estimate_alpha(haar_detail_coefficients(image, min_size), center=False)
