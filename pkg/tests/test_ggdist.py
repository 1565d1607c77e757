import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate, special, stats

from infosense.ggdist import (
    GAUSSIAN_SHAPE_TERM,
    AlphaClampWarning,
    GGParams,
    estimate_alpha,
    gg_cdf,
    gg_pdf,
    gg_sample,
    moment_ratio,
    noisy_shape_term,
    shape_term,
)

ALPHAS = [0.3, 0.5, 1.0, 2.0, 4.0]
C2 = 0.5 * math.log(2 * math.pi * math.e)


def _quad_entropy(alpha):
    params = GGParams(alpha)

    def integrand(x):
        p = gg_pdf(x, params)
        return -p * math.log(p) if p > 0 else 0.0

    # the density has a cusp at 0 for alpha <= 1; integrate each half separately
    val, _ = integrate.quad(integrand, 0, np.inf, limit=500, epsabs=1e-13, epsrel=1e-12)
    return 2 * val


def laplace_gauss_entropy(snr):
    """Entropy of a*L + s*Z (unit-variance Laplacian L, standard normal Z) by quadrature.

    The convolved density is known in closed form.
    """
    a = math.sqrt(snr / (1 + snr))
    s = math.sqrt(1 / (1 + snr))
    b = a / math.sqrt(2)

    def logf(x):
        t1 = s * s / (2 * b * b) - x / b + special.log_ndtr(x / s - s / b)
        t2 = s * s / (2 * b * b) + x / b + special.log_ndtr(-x / s - s / b)
        return np.logaddexp(t1, t2) - math.log(2 * b)

    val, _ = integrate.quad(lambda x: -math.exp(logf(x)) * logf(x), 0, np.inf, limit=400, epsabs=1e-12)
    return 2 * val


# --- parameters and density ---------------------------------------------------


@pytest.mark.parametrize("kwargs", [dict(alpha=0), dict(alpha=-1), dict(alpha=1, sigma=0), dict(alpha=np.nan)])
def test_params_reject_invalid(kwargs):
    with pytest.raises(ValueError):
        GGParams(**kwargs)


def test_beta_matches_gamma_ratio():
    for a in ALPHAS:
        assert GGParams(a).beta == pytest.approx(special.gamma(1 / a) / special.gamma(3 / a), rel=1e-12)


def test_pdf_known_values():
    assert gg_pdf(0.0, GGParams(2.0)) == pytest.approx(1 / math.sqrt(2 * math.pi), rel=1e-12)
    assert gg_pdf(0.0, GGParams(1.0)) == pytest.approx(1 / math.sqrt(2), rel=1e-12)


def test_pdf_matches_scipy_gennorm():
    x = np.linspace(-6, 6, 41)
    for a in ALPHAS:
        params = GGParams(a, mu=0.3, sigma=1.7)
        ref = stats.gennorm(a, loc=0.3, scale=params.scale).pdf(x)
        np.testing.assert_allclose(gg_pdf(x, params), ref, rtol=1e-12)


def test_pdf_symmetric_about_mean():
    params = GGParams(0.7, mu=-1.2, sigma=0.5)
    t = np.linspace(0, 5, 11)
    np.testing.assert_allclose(gg_pdf(params.mu + t, params), gg_pdf(params.mu - t, params))


def test_pdf_rejects_non_finite():
    with pytest.raises(ValueError):
        gg_pdf(np.inf, GGParams(1.0))
    with pytest.raises(ValueError):
        gg_pdf(np.array([0.0, np.nan]), GGParams(1.0))


@pytest.mark.parametrize("alpha", ALPHAS)
def test_pdf_normalized_with_unit_variance(alpha):
    params = GGParams(alpha, sigma=1.3)
    mass = 2 * integrate.quad(lambda x: gg_pdf(x, params), 0, np.inf, limit=500, epsabs=1e-13)[0]
    var = 2 * integrate.quad(lambda x: x * x * gg_pdf(x, params), 0, np.inf, limit=500, epsabs=1e-13)[0]
    assert mass == pytest.approx(1.0, abs=1e-6)
    assert var == pytest.approx(1.3**2, abs=1e-6)


def test_cdf_matches_integrated_pdf():
    for a in (0.5, 1.0, 3.0):
        params = GGParams(a, mu=0.5)
        for x in (-2.0, 0.1, 1.7):
            ref = integrate.quad(lambda t: gg_pdf(t, params), -np.inf, x, limit=300)[0]
            assert gg_cdf(x, params) == pytest.approx(ref, abs=1e-8)


# --- shape term -----------------------------------------------------------------


def test_shape_term_closed_forms():
    assert shape_term(2) == pytest.approx(C2, abs=1e-12)
    assert shape_term(1) == pytest.approx(1 + 0.5 * math.log(2), abs=1e-12)
    assert GAUSSIAN_SHAPE_TERM == pytest.approx(C2, abs=1e-15)


@pytest.mark.parametrize("alpha", ALPHAS)
def test_shape_term_matches_quadrature_entropy(alpha):
    assert shape_term(alpha) == pytest.approx(_quad_entropy(alpha), abs=1e-6)


def test_shape_term_reference_values():
    # values computed independently with mpmath at 30 digits
    refs = [
        (0.32, 0.467135251111715566796),
        (0.49, 0.975120425637370523487),
        (0.5, 0.992548489728867621711),
        (0.3, 0.362222014826442645537),
    ]
    for a, ref in refs:
        assert shape_term(a) == pytest.approx(ref, abs=1e-12)


def test_shape_term_maximized_by_gaussian():
    grid = np.linspace(0.2, 6.0, 600)
    values = np.array([shape_term(a) for a in grid])
    assert np.all(values <= C2 + 1e-12)
    assert grid[np.argmax(values)] == pytest.approx(2.0, abs=0.01)


def test_shape_term_rejects_nonpositive():
    with pytest.raises(ValueError):
        shape_term(0.0)


def test_shape_term_large_gamma_arguments():
    # Gamma(1/0.05) is ~1e17; log-gamma keeps this finite
    assert math.isfinite(shape_term(0.05))


# --- sampling ---------------------------------------------------------------------


def test_sample_gaussian_moments():
    x = gg_sample(GGParams(2.0), 100_000, seed=1)
    assert abs(x.var() - 1) < 0.05


def test_sample_laplacian_kurtosis():
    x = gg_sample(GGParams(1.0), 100_000, seed=2)
    assert stats.kurtosis(x) == pytest.approx(3.0, abs=0.3)


def test_sample_deterministic_given_seed():
    p = GGParams(0.4, mu=2.0, sigma=3.0)
    np.testing.assert_array_equal(gg_sample(p, 1, seed=5), gg_sample(p, 1, seed=5))
    np.testing.assert_array_equal(gg_sample(p, 100, seed=5), gg_sample(p, 100, seed=5))


def test_sample_matches_cdf():
    params = GGParams(0.5, mu=1.0, sigma=2.0)
    x = gg_sample(params, 20_000, seed=3)
    res = stats.kstest(x, lambda t: gg_cdf(t, params))
    assert res.pvalue > 1e-3


def test_sample_rejects_zero_count():
    with pytest.raises(ValueError):
        gg_sample(GGParams(1.0), 0)


# --- alpha estimation ---------------------------------------------------------------


@pytest.mark.parametrize("alpha", [0.3, 0.5, 1.0, 2.0])
def test_estimate_alpha_round_trip(alpha):
    x = gg_sample(GGParams(alpha, mu=0.7, sigma=2.5), 100_000, seed=11)
    assert estimate_alpha(x) == pytest.approx(alpha, rel=0.1)


def test_moment_ratio_closed_forms():
    assert moment_ratio(2.0) == pytest.approx(math.sqrt(2 / math.pi), rel=1e-12)
    assert moment_ratio(1.0) == pytest.approx(1 / math.sqrt(2), rel=1e-12)


def test_estimate_alpha_errors():
    with pytest.raises(ValueError):
        estimate_alpha(np.ones(500))
    with pytest.raises(ValueError):
        estimate_alpha(np.arange(50.0))


def test_estimate_alpha_clamps_with_warning():
    # two-point distribution: E|x| / rms = 1, above every GG ratio
    x = np.tile([-1.0, 1.0], 100)
    with pytest.warns(AlphaClampWarning):
        assert estimate_alpha(x) == 10.0


@settings(max_examples=25, deadline=None)
@given(st.floats(0.1, 8.0))
def test_moment_ratio_inverts(alpha):
    ratio = float(moment_ratio(alpha))
    # synthesize samples with exactly this ratio: values in {0, +-v}
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        # |x| = v with probability q gives ratio sqrt(q)
        q = ratio**2
        n = 100_000
        k = int(round(q * n))
        x = np.zeros(n)
        x[:k] = np.where(np.arange(k) % 2 == 0, 1.0, -1.0)
        est = estimate_alpha(x, center=False)
    assert float(moment_ratio(est)) == pytest.approx(math.sqrt(k / n), abs=1e-9)


# --- noisy shape term -------------------------------------------------------------------


def test_noisy_shape_term_limits():
    assert noisy_shape_term(0.5, 0.0) == C2
    assert noisy_shape_term(2.0, 3.7) == C2
    assert noisy_shape_term(0.5, np.inf) == shape_term(0.5)
    assert noisy_shape_term(0.5, 1e6) == pytest.approx(shape_term(0.5), abs=0.01)
    assert noisy_shape_term(1.0, 1e-2) == pytest.approx(C2, abs=0.02)


@pytest.mark.parametrize("snr", [0.01, 0.1, 1.0, 10.0, 100.0, 1e4, 1e6])
def test_noisy_shape_term_matches_laplace_oracle(snr):
    assert noisy_shape_term(1.0, snr) == pytest.approx(laplace_gauss_entropy(snr), abs=1e-4)


@pytest.mark.parametrize("alpha", [0.3, 0.5, 1.0])
def test_noisy_shape_term_monotone_and_bounded(alpha):
    snrs = np.logspace(-2, 6, 17)
    values = [noisy_shape_term(alpha, s) for s in snrs]
    assert all(a >= b - 1e-9 for a, b in zip(values, values[1:]))
    assert all(shape_term(alpha) <= v <= C2 for v in values)


@pytest.mark.parametrize("alpha,snr", [(0.3, 1.0), (0.5, 100.0), (1.0, 10.0)])
def test_noisy_shape_term_grid_doubling(alpha, snr):
    assert noisy_shape_term(alpha, snr, check=True) == pytest.approx(noisy_shape_term(alpha, snr), abs=1e-3)


def test_noisy_shape_term_rejects_negative_snr():
    with pytest.raises(ValueError):
        noisy_shape_term(1.0, -0.1)
