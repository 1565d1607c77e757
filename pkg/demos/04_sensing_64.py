"""
Sensing a small synthetic image
===============================

A 64 x 64 image is drawn from the multi-resolution model, measured with
each sensing scheme at 10% and 25% of its pixel count, and reconstructed
either linearly or by total-variation minimization.  Takes about a minute.
"""

from infosense.imaging import synthesize_image
from infosense.model import natural_image_model
from infosense.operators import SCHEMES, SchemeSpec, build_scheme, measure
from infosense.recon import linear_recon, psnr, tv_min_recon

model = natural_image_model(64, 64, alpha=0.32, lambda0=1.5e6)
image = synthesize_image(model, seed=0)
print(f"image range {image.min():.0f}..{image.max():.0f}")

for frac in (0.10, 0.25):
    p = round(frac * image.size)
    print(f"p = {p} ({frac:.0%})")
    for name in SCHEMES:
        spec = SchemeSpec(name, seed=0, n_dct=min(1000, p))
        op = build_scheme(spec, model, p)
        y = measure(op, image).y
        if spec.decoder == "linear":
            rec = linear_recon(op, y)
        else:
            rec = tv_min_recon(op, y).image
        print(f"  {name:>10s}  {psnr(image, rec).db:6.2f} dB")
