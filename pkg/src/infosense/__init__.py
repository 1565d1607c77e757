"""Information-maximizing linear projections for sparse, multi-resolution sources.

Submodules:

``ggdist``
    Generalized Gaussian density, shape term, sampling and shape estimation.
``entropy``
    Entropy of random and PCA projections, sub-volume recursion, kNN estimator.
``model``
    Octave-band image model, capacity diagrams and sensor allocation.
``operators``
    Orthonormal transforms and matrix-free sensing schemes.
``recon``
    Linear and TV reconstruction, PSNR, Bayes least-squares decoding.
``imaging``
    PGM I/O, synthetic images and band calibration.
``toydemo``
    Projections of a 2-D Gaussian mixture.
"""

from .ggdist import GGParams, estimate_alpha, noisy_shape_term, shape_term
from .model import MultiResModel, allocate, capacity_diagram, natural_image_model

__version__ = "0.1.0"

__all__ = [
    "GGParams",
    "MultiResModel",
    "allocate",
    "capacity_diagram",
    "estimate_alpha",
    "natural_image_model",
    "noisy_shape_term",
    "shape_term",
]
