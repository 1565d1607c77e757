"""
Random projections versus PCA
=============================

How much entropy do p projections of a d = 65536 dimensional source keep?
For a white sparse source random projections win, for a Gaussian source
with a decaying spectrum PCA wins, and for a sparse source with a decaying
spectrum the answer depends on p.
"""

import math

import numpy as np

from infosense.entropy import (
    hybrid_gap,
    pca_entropy_gaussian_powerlaw,
    pca_entropy_white,
    random_entropy_gaussian_powerlaw,
    random_entropy_white,
)

d = 2**16
p = np.array([1, 16, 256, 1024, 4096])

# White generalized-Gaussian source: the gap grows as the source gets sparser
print("white source, random minus PCA (nats)")
for alpha in (0.3, 0.5, 1.0):
    gap = random_entropy_white(alpha, d, p) - pca_entropy_white(alpha, p)
    print(f"  alpha={alpha:<4}", " ".join(f"{g:10.2f}" for g in gap))

# Gaussian source with variances k**-gamma: PCA keeps the large variances
print("power-law Gaussian source, random minus PCA (nats)")
for gamma in (1.0, 2.0, 3.0):
    gap = random_entropy_gaussian_powerlaw(gamma, d, p) - pca_entropy_gaussian_powerlaw(gamma, p)
    print(f"  gamma={gamma:<4}", " ".join(f"{g:10.2f}" for g in gap))

# Sparse and coloured: sum the two effects and look for a change of sign.
# The recursion behind the Gaussian term is O(d * p), so this takes a few seconds.
grid = np.unique(np.round(np.logspace(0, math.log10(d - 1), 120)).astype(int))
for alpha, gamma in ((0.3, 2.0), (0.5, 1.0), (0.5, 2.0)):
    gap = hybrid_gap(alpha, gamma, d, grid)
    flips = grid[np.flatnonzero(np.diff(np.sign(gap)))]
    where = f"sign change near p = {flips[0]}" if flips.size else "no sign change"
    print(f"hybrid alpha={alpha}, gamma={gamma}: {where}")
