"""
Allocating sensors across frequency bands
=========================================

A natural image is modelled as DCT octave bands whose variances fall by 4
per band.  Each random projection inside a band adds a known amount of
entropy; sorting all of them gives a capacity diagram, and a budget of p
sensors simply takes the p largest entries.
"""

import numpy as np

from infosense.model import allocate, apply_threshold_rule, capacity_diagram, natural_image_model

# 256 x 256 image, pixel-scale variances
model = natural_image_model(256, 256, alpha=0.32, lambda0=2.4e7)
print("band sizes:", model.sizes.tolist())

# Sparser sources (smaller alpha) push sensors to higher bands
for alpha in (0.32, 0.49):
    diag = capacity_diagram(natural_image_model(256, 256, alpha, lambda0=2.4e7))
    print(f"alpha={alpha}: p=5000 ->", allocate(diag, 5000).per_band)

# Measurement noise flattens the high bands, so sensors move down
for sigma in (0.0, 5.0, 10.0, 20.0):
    alloc = allocate(capacity_diagram(model, sigma), 21_000)
    print(f"sigma={sigma:>4}: p=21000 ->", alloc.per_band)

# Bands that are nearly full are measured directly, nearly empty ones are
# dropped, and the rest share one random mixing pool
plan = apply_threshold_rule(allocate(capacity_diagram(model), 5000), model)
print("direct bands:", sorted(plan.full_bands))
print("mixed bands:", sorted(plan.mixed_bands), "with", plan.residual_random_count, "random rows")
print("skipped bands:", sorted(plan.skipped_bands))

# The whole diagram, first few entries
diag = capacity_diagram(model)
order = diag.descending_order()[:8]
print(np.column_stack([diag.band[order], diag.k[order], diag.nu[order].round(3)]))
