import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate, stats

from gbpcrps.distribution import (
    GbpParams,
    cdf,
    iter_chunks,
    mean,
    pdf,
    quantile,
    sample,
    sample_chunk,
    w_transform,
)
from gbpcrps.errors import DomainError, InfiniteMeanError

from oracles import gbp_cdf, gbp_pdf

shape = st.floats(0.2, 8.0)
power = st.floats(0.3, 6.0)
scale = st.floats(0.05, 50.0)


def params_strategy():
    return st.builds(GbpParams, shape, shape, power, scale)


# --- parameters ------------------------------------------------------------

@pytest.mark.parametrize("bad", [0.0, -1.0, math.inf, math.nan])
@pytest.mark.parametrize("field", ["alpha", "beta", "p", "q"])
def test_params_reject_invalid(field, bad):
    kw = dict(alpha=1.0, beta=1.0, p=1.0, q=1.0)
    kw[field] = bad
    with pytest.raises(DomainError):
        GbpParams(**kw)


def test_params_reject_non_numbers():
    with pytest.raises(DomainError):
        GbpParams("1", 1.0, 1.0, 1.0)
    with pytest.raises(DomainError):
        GbpParams(True, 1.0, 1.0, 1.0)


def test_mean_finite_flag():
    assert GbpParams(1, 2, 1.5, 1).mean_finite()
    assert not GbpParams(1, 1, 1, 1).mean_finite()


def test_w_transform_complement_exact_for_large_r():
    w, wc = w_transform(1e6, 3.0)
    assert wc == pytest.approx(1e-18, rel=1e-14)
    assert w == 1.0
    assert w_transform(0.0, 2.0) == (0.0, 1.0)


# --- pdf -------------------------------------------------------------------

def test_pdf_log_logistic_at_one():
    assert pdf(GbpParams(1, 1, 1, 1), 1.0) == pytest.approx(0.25, rel=1e-15)


def test_pdf_origin_trichotomy():
    assert pdf(GbpParams(2, 1, 1, 1), 0.0) == 0.0
    # alpha p == 1: finite limit p / (q B(a, b)), B(0.5, 2) = 4/3
    assert pdf(GbpParams(0.5, 2, 2, 3), 0.0) == pytest.approx(2 / (3 * 4 / 3), rel=1e-13)
    assert pdf(GbpParams(0.5, 2, 1, 1), 0.0) == math.inf


def test_pdf_integrates_to_one():
    par = GbpParams(1, 2, 1.5, 1)
    val, _ = integrate.quad(lambda x: pdf(par, x), 0, np.inf, epsabs=1e-12, epsrel=1e-10)
    assert val == pytest.approx(1.0, abs=1e-10)


def test_pdf_negative_x():
    with pytest.raises(DomainError):
        pdf(GbpParams(1, 1, 1, 1), -1e-3)


@settings(max_examples=200, deadline=None)
@given(params_strategy(), st.floats(1e-3, 1e3))
def test_pdf_matches_scipy_formula(par, x):
    ref = gbp_pdf(par.alpha, par.beta, par.p, par.q, x)
    if ref == 0.0 or not math.isfinite(ref) or ref < 1e-280:
        return
    assert pdf(par, x) == pytest.approx(ref, rel=1e-10)


def test_pdf_overflow_safe():
    # r^p overflows a double; the density must still come out as a number
    val = pdf(GbpParams(1, 2, 50, 1), 1e10)
    assert math.isfinite(val) and val >= 0.0
    assert pdf(GbpParams(1, 2, 50, 1), 1e-10) == 0.0


# --- cdf -------------------------------------------------------------------

@pytest.mark.parametrize("a,p,q", [(0.5, 1.0, 1.0), (2.0, 3.0, 7.0), (5.0, 0.4, 0.1)])
def test_cdf_median_at_scale_for_equal_shapes(a, p, q):
    assert cdf(GbpParams(a, a, p, q), q) == pytest.approx(0.5, abs=1e-15)


def test_cdf_examples():
    par = GbpParams(1, 2, 1.5, 1)
    assert cdf(par, 0.0) == 0.0
    assert cdf(par, 1.0) == pytest.approx(0.75, abs=1e-15)
    assert cdf(par, math.inf) == 1.0
    assert cdf(par, 1e12) == pytest.approx(1.0, abs=1e-15)


def test_cdf_negative_x():
    with pytest.raises(DomainError):
        cdf(GbpParams(1, 1, 1, 1), -1.0)


@settings(max_examples=200, deadline=None)
@given(params_strategy(), st.floats(1e-3, 1e3))
def test_cdf_matches_scipy(par, x):
    ref = gbp_cdf(par.alpha, par.beta, par.p, par.q, x)
    assert cdf(par, x) == pytest.approx(ref, abs=1e-13, rel=1e-11)


@settings(max_examples=100, deadline=None)
@given(params_strategy(), st.lists(st.floats(0.0, 1e3), min_size=2, max_size=20))
def test_cdf_monotone(par, xs):
    vals = [cdf(par, x) for x in sorted(xs)]
    assert all(0.0 <= v <= 1.0 for v in vals)
    assert all(b >= a - 1e-15 for a, b in zip(vals, vals[1:]))


@settings(max_examples=200, deadline=None)
@given(shape, shape, power, scale, st.floats(1e-3, 1e3))
def test_scale_equivariance(a, b, p, q, x):
    par, unit = GbpParams(a, b, p, q), GbpParams(a, b, p, 1.0)
    assert cdf(par, x) == pytest.approx(cdf(unit, x / q), abs=1e-12)
    f, f1 = pdf(par, x), pdf(unit, x / q) / q
    assert f == pytest.approx(f1, rel=1e-12, abs=1e-300)


@pytest.mark.parametrize("par", [
    GbpParams(1, 2, 1.5, 1), GbpParams(2, 3, 2, 1), GbpParams(0.7, 4, 3.3, 2.5),
    GbpParams(3, 0.8, 1.2, 0.5),
])
def test_cdf_derivative_is_pdf(par):
    lo, hi = quantile(par, 0.01), quantile(par, 0.99)
    for x in np.linspace(lo, hi, 100):
        h = 1e-5 * x
        fd = (cdf(par, x + h) - cdf(par, x - h)) / (2 * h)
        assert fd == pytest.approx(pdf(par, x), rel=1e-6)


# --- mean ------------------------------------------------------------------

def test_mean_examples():
    assert mean(GbpParams(1, 2, 1.5, 1)) == pytest.approx(
        math.gamma(5 / 3) * math.gamma(4 / 3), rel=1e-14)
    assert mean(GbpParams(1, 1, 2, 1)) == pytest.approx(math.pi / 2, rel=1e-14)
    with pytest.raises(InfiniteMeanError):
        mean(GbpParams(1, 1, 1, 1))


@pytest.mark.parametrize("par", [GbpParams(1, 2, 1.5, 1), GbpParams(2.5, 1.5, 2, 3)])
def test_mean_matches_quadrature(par):
    val, _ = integrate.quad(lambda x: x * gbp_pdf(par.alpha, par.beta, par.p, par.q, x),
                            0, np.inf, epsabs=1e-12, epsrel=1e-11, limit=200)
    assert mean(par) == pytest.approx(val, rel=1e-9)


def test_mean_scale_linear():
    assert mean(GbpParams(2, 3, 1.7, 4.5)) == pytest.approx(
        4.5 * mean(GbpParams(2, 3, 1.7, 1.0)), rel=1e-14)


# --- quantile --------------------------------------------------------------

def test_quantile_examples():
    assert quantile(GbpParams(1, 1, 1, 1), 0.75) == pytest.approx(3.0, rel=1e-12)
    assert quantile(GbpParams(2.5, 2.5, 1.3, 4.0), 0.5) == pytest.approx(4.0, rel=1e-12)


@pytest.mark.parametrize("u", [0.0, 1.0, -0.1, 1.5])
def test_quantile_domain(u):
    with pytest.raises(DomainError):
        quantile(GbpParams(1, 1, 1, 1), u)


@settings(max_examples=150, deadline=None)
@given(params_strategy(), st.sampled_from([0.1, 1.0, 10.0]))
def test_quantile_cdf_roundtrip(par, k):
    x = k * par.q
    u = cdf(par, x)
    if not 1e-12 < u < 1 - 1e-9:
        return
    assert cdf(par, quantile(par, u)) == pytest.approx(u, abs=1e-10)
    assert quantile(par, u) == pytest.approx(x, rel=1e-6)


def test_quantile_scales_with_q():
    a = quantile(GbpParams(2, 3, 1.5, 1.0), 0.3)
    b = quantile(GbpParams(2, 3, 1.5, 7.0), 0.3)
    assert b == pytest.approx(7 * a, rel=1e-12)


# --- sampler ---------------------------------------------------------------

def test_sample_deterministic():
    par = GbpParams(1, 2, 1.5, 1)
    a = sample(par, 123, 5000)
    b = sample(par, 123, 5000)
    assert np.array_equal(a, b)
    assert not np.array_equal(a, sample(par, 124, 5000))


def test_sample_chunks_tile_stream():
    par = GbpParams(2, 2, 1, 1)
    whole = sample(par, 7, 2500, chunk=1000)
    parts = [sample_chunk(par, 7, i, n) for i, n in iter_chunks(2500, 1000)]
    assert np.array_equal(whole, np.concatenate(parts))
    assert list(iter_chunks(2500, 1000)) == [(0, 1000), (1, 1000), (2, 500)]


def test_iter_chunks_validation():
    with pytest.raises(DomainError):
        list(iter_chunks(0))
    with pytest.raises(DomainError):
        list(iter_chunks(10, 0))


def test_sample_mean_within_four_se():
    par = GbpParams(1, 2, 1.5, 1)
    x = sample(par, 42, 10 ** 6)
    se = x.std(ddof=1) / math.sqrt(x.size)
    assert abs(x.mean() - mean(par)) < 4 * se


def test_sample_median_fraction():
    n = 10 ** 6
    x = sample(GbpParams(2, 2, 1, 1), 42, n)
    assert abs(np.mean(x < 1.0) - 0.5) < 4 * math.sqrt(0.25 / n)


@pytest.mark.parametrize("par", [GbpParams(1, 2, 1.5, 1), GbpParams(0.5, 3, 2.5, 2.0)])
def test_sample_ks(par):
    x = sample(par, 42, 10 ** 6)
    res = stats.kstest(x, lambda t: gbp_cdf(par.alpha, par.beta, par.p, par.q, t))
    # 1% critical value for large n
    assert res.statistic < 1.628 / math.sqrt(x.size)


def test_sample_probability_integral_transform_uniform():
    par = GbpParams(2, 3, 2, 1)
    x = sample(par, 42, 10 ** 6)
    u = gbp_cdf(par.alpha, par.beta, par.p, par.q, x)
    counts, _ = np.histogram(u, bins=100, range=(0.0, 1.0))
    res = stats.chisquare(counts)
    assert res.pvalue > 1e-3
