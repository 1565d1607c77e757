import math
from types import SimpleNamespace

import numpy as np
import pytest
from scipy import linalg, optimize

from infosense.model import natural_image_model
from infosense.operators import SchemeSpec, build_scheme, random_mixing_operator
from infosense.recon import (
    PSNR_CAP,
    TVSolverConfig,
    bls_estimate,
    divergence,
    gradient,
    linear_recon,
    psnr,
    tv_min_recon,
    tv_norm,
)


def smoothed_tv_oracle(w, y, n, restarts=3, seed=0):
    """min TV(x) s.t. Wx = y by L-BFGS over null-space coordinates of a slightly smoothed TV."""
    null = linalg.null_space(w)
    x0 = w.T @ y

    def f(z):
        g = gradient((x0 + null @ z).reshape(n, n))
        mag = np.sqrt((g * g).sum(axis=0) + 1e-14)
        return mag.sum(), null.T @ (-divergence(g / mag).ravel())

    rng = np.random.default_rng(seed)
    best = math.inf
    for _ in range(restarts):
        res = optimize.minimize(
            f, rng.standard_normal(null.shape[1]), jac=True, method="L-BFGS-B",
            options=dict(maxiter=20000, gtol=1e-12, ftol=1e-15),
        )
        best = min(best, res.fun)
    return best


def nested_rectangles(side=32):
    img = np.zeros((side, side))
    img[4:28, 6:26] = 60.0
    img[12:20, 12:20] = 180.0
    return img


def toy_mixture():
    return SimpleNamespace(
        weights=np.array([0.3, 0.7]),
        means=np.array([[2.0, 0.5], [-1.0, -0.3]]),
        covs=np.array([[[0.4, 0.1], [0.1, 0.2]], [[0.3, -0.05], [-0.05, 0.5]]]),
    )


def sample_mixture(mix, n, rng):
    comp = rng.choice(len(mix.weights), size=n, p=mix.weights)
    out = np.empty((n, 2))
    for c in range(len(mix.weights)):
        idx = comp == c
        out[idx] = rng.multivariate_normal(mix.means[c], mix.covs[c], size=idx.sum())
    return out


# --- gradient and TV --------------------------------------------------------------------


def test_divergence_is_negative_adjoint():
    rng = np.random.default_rng(0)
    x = rng.standard_normal((9, 7))
    p = rng.standard_normal((2, 9, 7))
    assert np.sum(gradient(x) * p) == pytest.approx(-np.sum(x * divergence(p)), rel=1e-12)


def test_tv_norm_values():
    assert tv_norm(np.full((5, 5), 3.0)) == 0.0
    step = np.zeros((4, 4))
    step[:, 2:] = 1.0
    assert tv_norm(step) == pytest.approx(4.0)
    ramp = np.add.outer(np.arange(3.0), np.arange(3.0))
    # interior pixels see both unit differences; the last row/column only one
    assert tv_norm(ramp) == pytest.approx(4 * math.sqrt(2) + 4)


# --- TV decoder --------------------------------------------------------------------------


def test_tv_matches_convex_oracle_8x8():
    rng = np.random.default_rng(0)
    for seed, m in [(1, 24), (2, 40)]:
        x = np.cumsum(rng.standard_normal((8, 8)), axis=0)
        op = random_mixing_operator(64, m, seed=seed)
        w = op.to_dense()
        y = w @ x.ravel()
        ref = smoothed_tv_oracle(w, y, 8)
        res = tv_min_recon(op, y, TVSolverConfig(max_iter=20000, tol=1e-9))
        assert res.tv == pytest.approx(ref, rel=5e-3)
        assert res.residual <= 1e-6 * np.linalg.norm(y) + 1e-9


def test_tv_phantom_exact_recovery():
    img = nested_rectangles()
    model = natural_image_model(32, 32, 0.5)
    op = build_scheme(SchemeSpec("random", seed=0), model, 512)
    res = tv_min_recon(op, op.apply(img))
    assert np.linalg.norm(res.image - img) / np.linalg.norm(img) < 1e-3


def test_tv_full_measurements_return_image():
    img = np.random.default_rng(3).uniform(0, 255, (16, 16))
    op = build_scheme(SchemeSpec("random", seed=1), natural_image_model(16, 16, 0.5), 256)
    res = tv_min_recon(op, op.apply(img))
    np.testing.assert_allclose(res.image, img, atol=1e-3)


def test_tv_constant_image_with_dc():
    img = np.full((16, 16), 77.0)
    op = build_scheme(SchemeSpec("dct-tv"), natural_image_model(16, 16, 0.5), 20)
    res = tv_min_recon(op, op.apply(img))
    np.testing.assert_allclose(res.image, img, atol=1e-4)
    assert res.tv < 1e-3


def test_tv_history_non_increasing_and_feasible():
    img = nested_rectangles(16)
    op = build_scheme(SchemeSpec("uca", seed=2), natural_image_model(16, 16, 0.32), 100)
    y = op.apply(img)
    res = tv_min_recon(op, y, TVSolverConfig(max_iter=300))
    assert np.all(np.diff(res.tv_history) <= 0)
    assert res.residual <= 2e-6 * np.linalg.norm(y)


def test_tv_noisy_epsilon_ball():
    img = nested_rectangles(16)
    op = build_scheme(SchemeSpec("random", seed=3), natural_image_model(16, 16, 0.5), 128)
    rng = np.random.default_rng(0)
    y = op.apply(img) + 2.0 * rng.standard_normal(128)
    cfg = TVSolverConfig(noise_sigma=2.0, max_iter=500)
    res = tv_min_recon(op, y, cfg)
    assert res.residual <= 2.0 * math.sqrt(128) * (1 + 1e-6) + 1e-6


def test_tv_reports_non_convergence():
    op = build_scheme(SchemeSpec("random", seed=0), natural_image_model(16, 16, 0.5), 100)
    res = tv_min_recon(op, op.apply(nested_rectangles(16)), TVSolverConfig(max_iter=5))
    assert not res.converged
    assert res.iterations == 5


def test_tv_config_validation():
    with pytest.raises(ValueError):
        TVSolverConfig(primal_step=1.0, dual_step=1.0)
    with pytest.raises(ValueError):
        TVSolverConfig(max_iter=0)
    with pytest.raises(ValueError):
        TVSolverConfig(data_epsilon=-1.0)
    assert TVSolverConfig(noise_sigma=2.0).epsilon_for(np.ones(100)) == pytest.approx(20.0)


def test_tv_rejects_wrong_measurement_count():
    op = random_mixing_operator(64, 10, seed=0)
    with pytest.raises(ValueError):
        tv_min_recon(op, np.zeros(11))


# --- linear decoder --------------------------------------------------------------------------


def test_linear_recon_is_projection():
    op = build_scheme(SchemeSpec("dct-linear"), natural_image_model(16, 16, 0.5), 40)
    x = np.random.default_rng(0).standard_normal((16, 16))
    rec = linear_recon(op, op.apply(x))
    np.testing.assert_allclose(op.apply(rec), op.apply(x), atol=1e-12)
    np.testing.assert_allclose(linear_recon(op, op.apply(rec)), rec, atol=1e-12)
    assert np.linalg.norm(rec) <= np.linalg.norm(x)


# --- PSNR ----------------------------------------------------------------------------------


def test_psnr_values():
    ref = np.zeros((8, 8))
    cand = np.where(np.indices((8, 8)).sum(axis=0) % 2 == 0, 1.0, -1.0)  # MSE exactly 1
    assert psnr(ref, cand).db == pytest.approx(48.1308036, abs=1e-6)
    assert psnr(ref, ref + 16).db == pytest.approx(20 * math.log10(255 / 16), abs=1e-9)
    assert psnr(ref, ref + 16).db == pytest.approx(24.0484, abs=1e-4)


def test_psnr_exact_flag():
    img = np.random.default_rng(1).uniform(0, 255, (4, 4))
    res = psnr(img, img.copy())
    assert res.exact and res.db == PSNR_CAP
    assert float(res) == PSNR_CAP
    assert not psnr(img, img + 1).exact


def test_psnr_shift_invariance_and_errors():
    rng = np.random.default_rng(2)
    a, b = rng.uniform(0, 255, (2, 6, 6))
    assert psnr(a + 40, b + 40).db == pytest.approx(psnr(a, b).db, rel=1e-12)
    with pytest.raises(ValueError):
        psnr(np.zeros((2, 2)), np.zeros((2, 3)))


# --- BLS estimate -------------------------------------------------------------------------------


def test_bls_isotropic_gaussian():
    mix = SimpleNamespace(weights=[1.0], means=[[0.0, 0.0]], covs=[np.eye(2)])
    w = np.array([0.6, 0.8])
    np.testing.assert_allclose(bls_estimate(mix, w, 1.7), 1.7 * w, atol=1e-14)
    ys = np.array([-1.0, 0.0, 2.0])
    np.testing.assert_allclose(bls_estimate(mix, w, ys), ys[:, None] * w, atol=1e-14)


def test_bls_symmetric_mixture_at_zero():
    cov = np.array([[0.5, 0.2], [0.2, 0.3]])
    mix = SimpleNamespace(weights=[0.5, 0.5], means=[[1.0, 2.0], [-1.0, -2.0]], covs=[cov, cov])
    w = np.array([1.0, 1.0]) / math.sqrt(2)
    np.testing.assert_allclose(bls_estimate(mix, w, 0.0), 0.0, atol=1e-14)


def test_bls_far_tail_picks_dominant_component():
    mix = toy_mixture()
    w = np.array([1.0, 0.0])
    # 10 projected standard deviations above the right-hand component
    y = 2.0 + 10 * math.sqrt(0.4)
    cond = mix.means[0] + mix.covs[0] @ w / (w @ mix.covs[0] @ w) * (y - mix.means[0] @ w)
    np.testing.assert_allclose(bls_estimate(mix, w, y), cond, atol=1e-10)


def test_bls_beats_linear_decoders():
    mix = toy_mixture()
    rng = np.random.default_rng(0)
    x = sample_mixture(mix, 20_000, rng)
    for theta in np.linspace(0, np.pi, 7, endpoint=False):
        w = np.array([math.cos(theta), math.sin(theta)])
        y = x @ w
        mse_bls = np.mean(np.sum((x - bls_estimate(mix, w, y)) ** 2, axis=1))
        # best affine decoder fitted on the same samples
        design = np.column_stack([y, np.ones_like(y)])
        coef, *_ = np.linalg.lstsq(design, x, rcond=None)
        mse_lin = np.mean(np.sum((x - design @ coef) ** 2, axis=1))
        assert mse_bls <= mse_lin * 1.01


def test_bls_errors():
    mix = toy_mixture()
    with pytest.raises(ValueError):
        bls_estimate(mix, np.array([1.0, 1.0]), 0.0)
    degenerate = SimpleNamespace(weights=[1.0], means=[[0.0, 0.0]], covs=[np.diag([0.0, 1.0])])
    with pytest.raises(ValueError):
        bls_estimate(degenerate, np.array([1.0, 0.0]), 0.0)
