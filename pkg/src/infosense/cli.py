"""Command-line experiments writing CSV and PGM outputs.

Every CSV starts with a ``# config`` comment recording the full command
configuration, seed included, so each output can be regenerated.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

import numpy as np
from scipy import special

from . import entropy, imaging, toydemo
from .ggdist import shape_term
from .model import allocate, capacity_diagram, natural_image_model
from .operators import SCHEMES, SchemeSpec, build_scheme, measure
from .recon import TVSolverConfig, linear_recon, psnr, tv_min_recon

__all__ = ["build_parser", "main"]

DEFAULT_COMPARE_GRID = ",".join(str(2**k) for k in range(16)) + ",49152,61440"
DEFAULT_SENSE_GRID = "0.1,0.25"


def _parse_grid(text, d=None):
    """Comma-separated counts; values below 1 are fractions of ``d``."""
    values = []
    for token in text.split(","):
        token = token.strip()
        if not token:
            continue
        v = float(token)
        if 0 < v < 1:
            if d is None:
                raise ValueError(f"fractional grid value {token} needs a dimension")
            v = round(v * d)
        if v < 1 or v != int(v):
            raise ValueError(f"bad grid value {token!r}")
        values.append(int(v))
    if not values:
        raise ValueError("empty p grid")
    return values


def _config_line(args):
    cfg = {k: v for k, v in sorted(vars(args).items()) if k != "func"}
    return "config " + json.dumps(cfg, sort_keys=True, default=str)


def _out_dir(args):
    path = Path(args.out_dir)
    path.mkdir(parents=True, exist_ok=True)
    return path


def _load_image(path):
    image = imaging.read_pgm(path)
    if image.shape[0] != image.shape[1]:
        raise ValueError(f"{path}: image must be square, got {image.shape[1]}x{image.shape[0]}")
    return image


def cmd_capacity(args):
    model = natural_image_model(args.side, args.side, args.alpha, args.lambda0)
    if args.image:
        image = _load_image(args.image)
        model = imaging.calibrated_model(natural_image_model(image.shape[0], image.shape[0], args.alpha), image)
    out = _out_dir(args)
    for sigma in args.sigma:
        diagram = capacity_diagram(model, sigma)
        path = out / f"capacity_alpha{args.alpha:g}_sigma{sigma:g}.csv"
        with open(path, "w") as fh:
            diagram.write_csv(fh, comment=_config_line(args))
        print(f"wrote {path}")
        if args.p is not None:
            alloc = allocate(diagram, args.p)
            print(f"sigma={sigma:g} p={args.p} per-band: " + " ".join(str(n) for n in alloc.per_band))
    return 0


def cmd_compare(args):
    d = args.d
    grid = np.array(_parse_grid(args.p_grid))
    if grid.max() > d:
        raise ValueError(f"p grid exceeds d={d}")
    if args.mode == "white":
        rand = entropy.random_entropy_white(args.alpha, d, grid)
        pca = entropy.pca_entropy_white(args.alpha, grid)
    elif args.mode == "gaussian":
        rand = entropy.random_entropy_gaussian_powerlaw(args.gamma, d, grid)
        pca = entropy.pca_entropy_gaussian_powerlaw(args.gamma, grid)
    else:
        pca = grid * shape_term(args.alpha) - 0.5 * args.gamma * special.gammaln(grid + 1.0)
        rand = pca + entropy.hybrid_gap(args.alpha, args.gamma, d, grid)
    curves = [
        entropy.EntropyCurve.from_arrays("random", grid, rand),
        entropy.EntropyCurve.from_arrays("pca", grid, pca),
        entropy.EntropyCurve.from_arrays("gap", grid, np.asarray(rand) - np.asarray(pca)),
    ]
    path = _out_dir(args) / f"compare_{args.mode}.csv"
    with open(path, "w") as fh:
        entropy.write_curves_csv(curves, fh, comment=_config_line(args))
    gap = np.asarray(rand) - np.asarray(pca)
    print(f"wrote {path}; gap range [{gap.min():.6g}, {gap.max():.6g}] nats")
    return 0


def cmd_sense(args):
    if args.image:
        image = _load_image(args.image)
        side = image.shape[0]
        alpha = args.alpha if args.alpha is not None else imaging.estimate_image_alpha(image)
        model = imaging.calibrated_model(natural_image_model(side, side, alpha), image, args.calibration)
    else:
        side = args.side
        alpha = args.alpha if args.alpha is not None else 0.32
        model = natural_image_model(side, side, alpha, lambda0=1.5e6 * (side / 64) ** 2)
        image = imaging.synthesize_image(model, args.seed)
    d = side * side
    schemes = list(SCHEMES) if args.scheme == "all" else [s.strip() for s in args.scheme.split(",")]
    grid = _parse_grid(args.p_grid, d)
    out = _out_dir(args)
    cfg = TVSolverConfig(max_iter=args.max_iter, noise_sigma=args.sigma)

    path = out / "sense_psnr.csv"
    with open(path, "w") as fh:
        fh.write(f"# {_config_line(args)} alpha_used={alpha!r}\n")
        fh.write("scheme,p,psnr_db,exact,converged,iterations\n")
        for name in schemes:
            for p in grid:
                spec = SchemeSpec(name, seed=args.seed, sigma=args.sigma, n_dct=min(args.n_dct, p))
                op = build_scheme(spec, model, p)
                y = measure(op, image, args.sigma, args.seed).y
                if spec.decoder == "linear":
                    rec, converged, iters = linear_recon(op, y), True, 0
                else:
                    res = tv_min_recon(op, y, cfg)
                    rec, converged, iters = res.image, res.converged, res.iterations
                q = psnr(image, rec)
                fh.write(f"{name},{p},{q.db:.4f},{int(q.exact)},{int(converged)},{iters}\n")
                imaging.write_pgm(out / f"recon_{name}_p{p}.pgm", rec)
                flag = "" if converged else " (not converged)"
                print(f"{name:>10s} p={p:<6d} PSNR {q.db:7.2f} dB{flag}")
    print(f"wrote {path}")
    return 0


def cmd_toy(args):
    mixture = toydemo.Gmm2D.from_json(args.mixture_file) if args.mixture_file else toydemo.default_mixture()
    thetas, ent, mse = toydemo.angle_sweep(mixture, args.n_angles, args.n_samples, args.seed)
    path = _out_dir(args) / "toy_sweep.csv"
    with open(path, "w") as fh:
        toydemo.write_sweep_csv(fh, thetas, ent, mse, comment=_config_line(args))
    summary = toydemo.toy_summary(mixture, args.n_samples, seed=args.seed)
    print(f"{'scheme':>8s} {'h(y) nats':>10s} {'MSE':>8s}")
    for name in ("random", "pca", "infomax"):
        h, m = summary[name]
        print(f"{name:>8s} {h:10.4f} {m:8.4f}")
    print(f"wrote {path}")
    return 0


def cmd_estimate_alpha(args):
    image = _load_image(args.image)
    coeffs = imaging.haar_detail_coefficients(image)
    alpha = imaging.estimate_image_alpha(image)
    print(f"alpha_hat = {alpha:.4f}  (n = {coeffs.size} Haar detail coefficients)")
    return 0


def _sigma_list(text):
    values = [float(s) for s in text.split(",") if s.strip()]
    if any(not (v >= 0 and math.isfinite(v)) for v in values):
        raise argparse.ArgumentTypeError("sigma must be non-negative")
    return values


def build_parser():
    parser = argparse.ArgumentParser(prog="infosense", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--out-dir", default="out")

    p = sub.add_parser("capacity", help="capacity diagram of bandwise random projections")
    p.add_argument("--alpha", type=float, default=0.32)
    p.add_argument("--side", type=int, default=256, help="image side length")
    p.add_argument("--lambda0", type=float, default=1.0, help="variance of the DC band")
    p.add_argument("--image", help="calibrate band variances to this PGM image")
    p.add_argument("--sigma", type=_sigma_list, default=[0.0], help="comma-separated noise levels")
    p.add_argument("--p", type=int, help="print the per-band allocation for this p")
    common(p)
    p.set_defaults(func=cmd_capacity)

    p = sub.add_parser("compare", help="random vs PCA projection entropy curves")
    p.add_argument("--mode", choices=("white", "gaussian", "hybrid"), default="white")
    p.add_argument("--alpha", type=float, default=0.5)
    p.add_argument("--gamma", type=float, default=2.0)
    p.add_argument("--d", type=int, default=65536)
    p.add_argument("--p-grid", default=DEFAULT_COMPARE_GRID)
    common(p)
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("sense", help="measure, reconstruct and score an image")
    p.add_argument("--image", help="8-bit PGM input (default: synthesize from the model)")
    p.add_argument("--side", type=int, default=64, help="side of the synthesized image")
    p.add_argument("--alpha", type=float, help="model shape (default: estimated from the image)")
    p.add_argument("--scheme", default="all", help=f"comma-separated subset of {','.join(SCHEMES)}")
    p.add_argument("--p-grid", default=DEFAULT_SENSE_GRID, help="counts, or fractions of d below 1")
    p.add_argument("--sigma", type=float, default=0.0)
    p.add_argument("--n-dct", type=int, default=1000, help="DCT rows of the romberg scheme")
    p.add_argument("--calibration", choices=("fitted", "raw"), default="fitted")
    p.add_argument("--max-iter", type=int, default=2000)
    common(p)
    p.set_defaults(func=cmd_sense)

    p = sub.add_parser("toy", help="2-D mixture projection demo")
    p.add_argument("--mixture-file", help="JSON mixture (default: packaged demo mixture)")
    p.add_argument("--n-angles", type=int, default=64)
    p.add_argument("--n-samples", type=int, default=10_000)
    common(p)
    p.set_defaults(func=cmd_toy)

    p = sub.add_parser("estimate-alpha", help="GG shape of an image's Haar details")
    p.add_argument("--image", required=True)
    p.set_defaults(func=cmd_estimate_alpha)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, OSError, KeyError, json.JSONDecodeError) as exc:
        print(f"infosense {args.command}: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
