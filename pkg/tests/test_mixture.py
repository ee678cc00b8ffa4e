import itertools
import math

import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st
from scipy.stats import norm

from gmmcrit import (
    Classification,
    MixtureParams,
    Sample,
    canonicalize,
    classify,
    density,
    exponent_spectrum,
    grad_loglik,
    loglik,
    responsibilities,
    trivial_point,
)
from gmmcrit.errors import (
    BoundaryGradientError,
    DegenerateEvaluationError,
    DomainError,
    SizeLimitError,
)
from gmmcrit.manyhills import REFERENCE_K7
from gmmcrit.mixture import alpha_near_multiple, log_density, pointwise_loglik

from conftest import random_params, random_points, rel_err

INV_SQRT_2PI = 0.3989422804014327


def brute_density(p, x):
    return p.alpha * norm.pdf(x, p.mu1, p.sigma1) + (1 - p.alpha) * norm.pdf(x, p.mu2, p.sigma2)


def reference_row(k):
    return MixtureParams(*REFERENCE_K7[k - 1][1:6])


# --- types -----------------------------------------------------------------


@pytest.mark.parametrize(
    "args",
    [(-0.1, 0, 0, 1, 1), (1.1, 0, 0, 1, 1), (0.5, 0, 0, 0, 1), (0.5, 0, 0, 1, -1), (0.5, math.nan, 0, 1, 1)],
)
def test_params_validation(args):
    with pytest.raises(DomainError):
        MixtureParams(*args)


def test_sample_sorted_and_readonly():
    s = Sample([3.0, 1.0, 2.0])
    assert list(s) == [1.0, 2.0, 3.0]
    with pytest.raises(ValueError):
        s.points[0] = 5.0
    with pytest.raises(DomainError):
        Sample([])
    with pytest.raises(DomainError):
        Sample([1.0, math.inf])


def test_sample_std_uses_population_convention():
    s = Sample([0.0, 2.0])
    assert s.mean == 1.0
    assert s.std == 1.0


# --- density ---------------------------------------------------------------


def test_density_single_standard_gaussian():
    assert density(MixtureParams(1.0, 0.0, 5.0, 1.0, 3.0), 0.0) == pytest.approx(0.3989422804, abs=1e-10)


def test_density_identical_components():
    assert density(MixtureParams(0.5, 0.0, 0.0, 1.0, 1.0), 0.0) == pytest.approx(0.3989422804, abs=1e-10)


def test_density_matches_term_by_term_formula():
    p = MixtureParams(0.3, 1.0, -1.0, 1.0, 2.0)
    # 0.3 phi(0; 1, 1) + 0.7 phi(0; -1, 2), written out
    expected = 0.3 * INV_SQRT_2PI * math.exp(-0.5) + 0.7 * INV_SQRT_2PI / 2 * math.exp(-1 / 8)
    assert density(p, 0.0) == pytest.approx(expected, rel=1e-14)


def test_density_rejects_nonfinite_x():
    with pytest.raises(DomainError):
        density(MixtureParams(0.5, 0, 1, 1, 1), math.nan)


def test_density_underflow_is_reported_but_log_density_is_finite():
    p = MixtureParams(0.5, 0.0, 1.0, 0.01, 0.01)
    with pytest.raises(DegenerateEvaluationError):
        density(p, 100.0)
    ld = log_density(p, 100.0)
    expected = math.log(0.5 / (0.01 * math.sqrt(2 * math.pi))) - 0.5 * (99 / 0.01) ** 2
    assert ld == pytest.approx(expected, rel=1e-12)


def test_density_integrates_to_one():
    rng = np.random.default_rng(11)
    nodes, weights = np.polynomial.legendre.leggauss(400)
    for _ in range(25):
        p = random_params(rng)
        smax = max(p.sigma1, p.sigma2)
        centre = 0.5 * (p.mu1 + p.mu2)
        half = 0.5 * abs(p.mu1 - p.mu2) + 12 * smax
        xs = centre + half * nodes
        total = half * float(np.dot(weights, np.exp(log_density(p, xs))))
        assert total == pytest.approx(1.0, abs=1e-8)


@settings(max_examples=60, deadline=None)
@given(
    st.floats(0.01, 0.99),
    st.floats(-5, 5),
    st.floats(-5, 5),
    st.floats(0.1, 3),
    st.floats(0.1, 3),
    st.floats(-8, 8),
)
def test_density_matches_scipy(a, m1, m2, s1, s2, x):
    p = MixtureParams(a, m1, m2, s1, s2)
    expected = brute_density(p, x)
    assume(expected > 1e-300)
    assert density(p, x) == pytest.approx(expected, rel=1e-12)



# --- loglik ----------------------------------------------------------------


def test_loglik_reference_row_k4(k7_sample):
    assert loglik(reference_row(4), k7_sample) == pytest.approx(-29.2858981551065, abs=1e-6)


def test_loglik_single_point():
    assert loglik(MixtureParams(1.0, 3.0, 0.0, 1.0, 1.0), [3.0]) == pytest.approx(-0.9189385332, abs=1e-10)


def test_loglik_direct_summation():
    rng = np.random.default_rng(5)
    for _ in range(50):
        p = random_params(rng)
        x = random_points(rng, 5)
        direct = sum(math.log(brute_density(p, xi)) for xi in x)
        assert rel_err(loglik(p, x), direct) < 1e-13


def test_loglik_doc_value():
    s = Sample([1.0, 1.2, 2.0, 2.2])
    assert round(loglik(MixtureParams(0.5, 1.1, 2.1, 0.1, 0.1), s), 6) == 0.761998


def test_loglik_reports_offending_index():
    p = MixtureParams(0.5, 0.0, 0.0, 1e-200, 1e-200)
    with pytest.raises(DegenerateEvaluationError) as info:
        pointwise_loglik(p, [0.0, 1e200])
    assert info.value.index == 1


# --- responsibilities ------------------------------------------------------


def test_responsibilities_identical_components():
    r = responsibilities(MixtureParams(0.5, 1.0, 1.0, 2.0, 2.0), [0.0, 1.0, 5.0])
    assert np.allclose(r.gamma, 0.5, atol=0, rtol=1e-15)


@pytest.mark.parametrize("alpha,value", [(1.0, 1.0), (0.0, 0.0)])
def test_responsibilities_boundary_alpha(alpha, value):
    r = responsibilities(MixtureParams(alpha, 0.0, 3.0, 1.0, 1.0), [0.0, 1.0, 2.0, 3.0])
    assert np.all(r.gamma == value)
    assert r.n1 == 4 * value


def test_responsibilities_formula():
    p = MixtureParams(0.3, 0.0, 10.0, 1.0, 1.5)
    x = [-0.5, 0.4, 9.0, 11.0]
    r = responsibilities(p, x)
    for g, xi in zip(r.gamma, sorted(x)):
        f1 = 0.3 * norm.pdf(xi, 0.0, 1.0)
        assert g == pytest.approx(f1 / brute_density(p, xi), rel=1e-14, abs=1e-300)
    assert r.n1 + r.n2 == pytest.approx(4, abs=1e-12)


def test_responsibilities_bounded_far_away():
    rng = np.random.default_rng(2)
    for _ in range(50):
        p = random_params(rng, -50, 50)
        r = responsibilities(p, random_points(rng, 20, 40.0))
        assert np.all((r.gamma >= 0) & (r.gamma <= 1))


# --- gradient --------------------------------------------------------------


def richardson_gradient(p, x, h=1e-6):
    """Central differences with one Richardson extrapolation step."""
    base = p.as_array()
    out = np.empty(5)
    for j in range(5):

        def cd(step):
            up, dn = base.copy(), base.copy()
            up[j] += step
            dn[j] -= step
            return (loglik(MixtureParams(*up), x) - loglik(MixtureParams(*dn), x)) / (2 * step)

        out[j] = (4 * cd(h) - cd(2 * h)) / 3
    return out


def test_gradient_matches_finite_differences():
    rng = np.random.default_rng(7)
    for _ in range(100):
        p = random_params(rng)
        x = random_points(rng, 8)
        g = grad_loglik(p, x)
        fd = richardson_gradient(p, x)
        scale = max(1.0, float(np.max(np.abs(fd))))
        assert np.max(np.abs(g - fd)) / scale < 1e-5


def test_gradient_trivial_point_vanishes():
    rng = np.random.default_rng(3)
    for _ in range(20):
        x = random_points(rng, int(rng.integers(2, 30)), 5.0)
        p = trivial_point(x, float(rng.uniform(0.01, 0.99)))
        assert np.max(np.abs(grad_loglik(p, x))) < 1e-9


def test_gradient_reference_row_small(k7_sample):
    assert np.max(np.abs(grad_loglik(reference_row(1), k7_sample))) < 1e-3


@pytest.mark.parametrize("alpha", [0.0, 1.0])
def test_gradient_boundary_rejected(alpha):
    with pytest.raises(BoundaryGradientError):
        grad_loglik(MixtureParams(alpha, 0, 1, 1, 1), [0.0, 1.0])


# --- exponent spectrum -----------------------------------------------------


def brute_spectrum(p, x):
    sums = []
    for ks in itertools.product((1, 2), repeat=len(x)):
        total = 0.0
        for xi, k in zip(x, ks):
            m, s = (p.mu1, p.sigma1) if k == 1 else (p.mu2, p.sigma2)
            total += (xi - m) ** 2 / (2 * s * s)
        sums.append(total)
    return sorted(sums)


def test_spectrum_generic_n3():
    p = MixtureParams(0.5, 0.0, 1.0, 1.0, 2.0)
    x = [0.3, 1.7, 2.9]
    count, values = exponent_spectrum(p, x)
    assert count == 8
    assert np.allclose(values, brute_spectrum(p, x), rtol=1e-14, atol=0)


def test_spectrum_single_point():
    assert exponent_spectrum(MixtureParams(0.5, 0.0, 1.0, 1.0, 1.0), [0.2])[0] == 2


def test_spectrum_coincident_components():
    p = MixtureParams(0.3, 1.5, 1.5, 0.7, 0.7)
    assert exponent_spectrum(p, np.linspace(-2, 2, 24))[0] == 1


def test_spectrum_size_limit():
    with pytest.raises(SizeLimitError):
        exponent_spectrum(MixtureParams(0.5, 0, 0, 1, 1), np.arange(25.0))


def test_spectrum_collapse_iff_coincide():
    rng = np.random.default_rng(13)
    for trial in range(200):
        n = int(rng.integers(1, 11))
        x = random_points(rng, n)
        if trial % 2:
            m, s = float(rng.normal()), float(rng.uniform(0.3, 2))
            p = MixtureParams(0.4, m, m, s, s)
        else:
            p = random_params(rng)
        count, _ = exponent_spectrum(p, x)
        coincide = p.mu1 == p.mu2 and p.sigma1 == p.sigma2
        assert (count == 1) == coincide
        # distinct values agree with brute-force clustering
        brute = brute_spectrum(p, x)
        distinct = 1 + sum(b - a > 1e-9 for a, b in zip(brute, brute[1:]))
        assert count == distinct


# --- canonicalize / classify -----------------------------------------------


def test_canonicalize_examples():
    assert canonicalize(MixtureParams(0.7, 2, 1, 1, 2)).as_tuple() == pytest.approx((0.3, 1, 2, 2, 1))
    p = MixtureParams(0.3, 1, 2, 2, 1)
    assert canonicalize(p) == p
    assert canonicalize(MixtureParams(0.2, 0, 0, 3, 1)).as_tuple() == pytest.approx((0.8, 0, 0, 1, 3))
    assert canonicalize(MixtureParams(0.7, 0, 0, 1, 1)).alpha == pytest.approx(0.3)


def test_canonicalize_preserves_density_and_is_idempotent():
    rng = np.random.default_rng(17)
    for _ in range(100):
        p = random_params(rng)
        c = canonicalize(p)
        assert canonicalize(c) == c
        assert c.mu1 <= c.mu2
        x = random_points(rng, 6)
        assert rel_err(loglik(c, x), loglik(p, x)) < 1e-13
        for xi in x:
            assert density(c, xi) == pytest.approx(density(p, xi), rel=1e-13)


def test_classify_examples():
    x = [0.0, 1.0, 4.0]
    assert classify(trivial_point(x, 0.4)) is Classification.TRIVIAL
    assert classify(reference_row(1)) is Classification.NONTRIVIAL
    assert classify(MixtureParams(1e-15, 0, 1, 1, 2)) is Classification.BOUNDARY
    assert classify(MixtureParams(0.5, 0, 1, 1e-9, 2)) is Classification.DEGENERATE


def test_alpha_near_multiple():
    assert alpha_near_multiple(2 / 7, 7)
    assert alpha_near_multiple(2 / 7 + 5e-7, 7)
    assert not alpha_near_multiple(0.1311958, 14)
