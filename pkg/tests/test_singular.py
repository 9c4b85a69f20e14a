import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from asymdim.errors import DomainError, SpecError
from asymdim.singular import (
    LimitProcedure, PowerTail, StepFunction, distribution_from_spectrum, dixmier_trace,
    duality_check, eccentricity, power_transform, ratio_sequence, rearrangement, scaled,
    spectral_dimension, spectral_mu,
)
from asymdim.spectral import WeightedSpectrum, ns_numbers, torus_spectrum

SPEC31 = WeightedSpectrum.from_pairs([(3.0, 0.5), (1.0, 0.5)])


def pw(e, c=1.0):
    """``c·t^-e`` on (0, ∞)."""
    return StepFunction.power(c, e)


@st.composite
def step_lambdas(draw):
    n = draw(st.integers(1, 12))
    gaps = draw(st.lists(st.floats(0.01, 5), min_size=n, max_size=n))
    drops = draw(st.lists(st.floats(0.01, 3), min_size=n, max_size=n))
    breaks = np.concatenate([[0.0], np.cumsum(gaps)])
    values = np.concatenate([np.cumsum(drops[::-1])[::-1], [0.0]])
    return StepFunction(breaks, values)


# -- distribution and rearrangement -------------------------------------------------


def test_distribution_of_two_point_spectrum():
    lam = distribution_from_spectrum(SPEC31)
    assert lam.breaks.tolist() == [0, 1, 3] and lam.values.tolist() == [1, 0.5, 0]
    assert lam([0.0, 0.99, 1.0, 2.0, 3.0, 10.0]).tolist() == [1, 1, 0.5, 0.5, 0, 0]


def test_distribution_degenerate_cases():
    empty = WeightedSpectrum(np.empty(0), np.empty(0))
    assert distribution_from_spectrum(empty)(5.0) == 0
    lam = distribution_from_spectrum(WeightedSpectrum.from_pairs([(2.5, 0.75)]))
    assert lam(2.4999) == 0.75 and lam(2.5) == 0


def test_rearrangement_of_two_point_spectrum():
    mu = rearrangement(distribution_from_spectrum(SPEC31))
    assert mu.breaks.tolist() == [0, 0.5, 1] and mu.values.tolist() == [3, 1, 0]
    # brute-force inf over an s grid
    s = np.linspace(0, 4, 4001)
    lam = distribution_from_spectrum(SPEC31)(s)
    for t in (0.1, 0.5, 0.7, 1.0, 2.0):
        assert mu(t) == pytest.approx(s[np.argmax(lam <= t)], abs=1e-3)


def test_rearrangement_of_sampled_inverse_square():
    s = 2.0 ** np.arange(0, 12)
    lam = StepFunction(s, s ** -2.0, head=PowerTail(1.0, 2.0), tail=PowerTail(1.0, 2.0))
    mu = rearrangement(lam)
    t = s ** -2.0
    assert np.max(np.abs(mu(t) - t ** -0.5) / t ** -0.5) <= 1e-9
    analytic = rearrangement(pw(2.0))
    assert (analytic.head.coef, analytic.head.exponent) == (1.0, 0.5)


def test_rearrangement_of_zero_is_zero():
    assert rearrangement(StepFunction.zero())(1e-9) == 0
    with pytest.raises(DomainError):
        rearrangement(StepFunction([0.0], [1.0]))


@settings(max_examples=80, deadline=None)
@given(step_lambdas())
def test_rearrangement_is_an_involution(lam):
    mu = rearrangement(lam)
    back = rearrangement(mu)
    assert back.breaks.tolist() == lam.breaks.tolist()
    assert back.values.tolist() == lam.values.tolist()
    for f in (mu, back):
        assert np.all(np.diff(f.values) <= 0) and np.all(np.diff(f.breaks) > 0)
        # right-continuous at every break
        assert f(f.breaks).tolist() == f.values.tolist()


def test_step_function_csv_round_trip(tmp_path):
    f = rearrangement(StepFunction([1.0, 2.0, 4.0], [1.0, 0.25, 1 / 16],
                                   head=PowerTail(1.0, 2.0), tail=PowerTail(1.0, 2.0)))
    g = StepFunction.from_csv(f.to_csv())
    assert g.breaks.tolist() == f.breaks.tolist() and g.values.tolist() == f.values.tolist()
    assert g.head == f.head and g.tail == f.tail


def test_function_tags():
    assert StepFunction.from_tag("pow:-0.5")(0.25) == pytest.approx(2.0)
    assert StepFunction.from_tag("pow:-1:3")(0.5) == pytest.approx(6.0)
    assert StepFunction.from_tag("const:2")(1e6) == 2.0
    for bad in ("log:1", "pow:x", "pow:0.5"):
        with pytest.raises(SpecError):
            StepFunction.from_tag(bad)


def test_step_function_validation():
    with pytest.raises(DomainError):
        StepFunction([0.0, 1.0], [1.0, 2.0])
    with pytest.raises(DomainError):
        StepFunction([1.0, 2.0], [1.0, 0.5])


# -- exponents and duality ------------------------------------------------------------


def test_spectral_dimension_examples():
    assert spectral_dimension(pw(0.5)) == pytest.approx(2.0, abs=1e-9)
    assert spectral_dimension(StepFunction([0.0], [3.0])) == math.inf


def test_duality_on_inverse_square():
    rep = duality_check(pw(2.0))
    assert rep.lhs == pytest.approx(0.5, abs=1e-9) and rep.rhs == pytest.approx(0.5, abs=1e-9)
    assert rep.agree


def test_duality_degenerate_for_compact_support():
    rep = duality_check(distribution_from_spectrum(SPEC31))
    assert rep.status == "degenerate-zero" and rep.agree


@settings(max_examples=40, deadline=None)
@given(st.floats(0.25, 4.0), st.integers(0, 10_000))
def test_duality_across_power_family(alpha, seed):
    # step λ sampled from s^-alpha on a random increasing grid
    s = np.sort(np.random.default_rng(seed).uniform(0, 70, 300))
    s = np.unique(2.0 ** np.concatenate([[0.0], s]))
    tail = PowerTail(1.0, alpha)
    lam = StepFunction(s, s ** -alpha, head=tail, tail=tail)
    assert duality_check(lam).agree


# -- eccentricity and traces ---------------------------------------------------------------


def test_eccentricity_examples():
    e1 = eccentricity(pw(1.0))
    assert e1.branch == "non-integrable" and e1.is_eccentric
    e2 = eccentricity(pw(0.5))
    assert e2.branch == "integrable" and not e2.is_eccentric
    assert e2.limit_estimate == pytest.approx(2 ** -0.5, abs=1e-3)
    e3 = eccentricity(StepFunction([0.0], [1.0]))
    assert e3.limit_estimate == pytest.approx(0.5, abs=1e-12) and not e3.is_eccentric


def test_inverse_power_ratios_are_log_ratios():
    ks, r, _ = ratio_sequence(pw(1.0), 2, 64)
    assert r == pytest.approx((ks - 1) / ks, rel=1e-9)


def test_power_transform_examples():
    mu = pw(0.5)
    assert power_transform(mu, 1) is mu
    assert eccentricity(power_transform(mu, 2)).is_eccentric
    sq = power_transform(rearrangement(distribution_from_spectrum(SPEC31)), 2)
    assert sq.values.tolist() == [9, 1, 0]
    with pytest.raises(DomainError):
        power_transform(mu, 0)


def test_dixmier_examples():
    T = pw(1.0)
    assert dixmier_trace(T, T).value == 1.0
    assert abs(dixmier_trace(pw(0.5), T).value) <= 1e-3
    assert dixmier_trace(scaled(T, 2.0), T).value == pytest.approx(2.0, rel=1e-12)
    with pytest.raises(DomainError):
        dixmier_trace(T, StepFunction.zero())


def test_dixmier_flags_non_eccentric_reference():
    r = dixmier_trace(pw(0.5), pw(0.5))
    assert r.value == 1.0 and not r.eccentric and r.warnings


@settings(max_examples=30, deadline=None)
@given(st.floats(0.1, 0.99), st.floats(0.1, 0.99), st.floats(0.1, 10))
def test_dixmier_monotone_and_homogeneous(e1, e2, c):
    T = pw(1.0)
    lo, hi = sorted([e1, e2])
    # t^-lo <= t^-hi on (0, 1], where the trace lives
    a = dixmier_trace(pw(lo), T, k_range=(2, 256)).value
    b = dixmier_trace(pw(hi), T, k_range=(2, 256)).value
    assert a <= b
    ca = dixmier_trace(scaled(pw(hi), c), T, k_range=(2, 256)).value
    assert ca == pytest.approx(c * b, rel=1e-12)


@settings(max_examples=40, deadline=None)
@given(st.floats(-5, 5), st.floats(-3, 3), st.floats(0.5, 0.99))
def test_limit_procedures_agree_on_convergent_sequences(L, c, q):
    seq = L + c * q ** np.arange(4096)
    a = LimitProcedure("log-cesaro").apply(seq)
    b = LimitProcedure("last-window").apply(seq)
    assert abs(a - b) <= 1e-6 and abs(a - L) <= 1e-6
    assert LimitProcedure().spread(seq) <= 1e-6


def test_unknown_limit_procedure():
    with pytest.raises(SpecError):
        LimitProcedure("banach")


# -- torus pipeline ----------------------------------------------------------------------


def test_torus_pipeline():
    spectra = [torus_spectrum(2, s) for s in (32, 64, 128)]
    mu, p, window = spectral_mu(spectra[-1])
    assert spectral_dimension(mu, regime=(window[0] / 64, window[0])) == pytest.approx(2, abs=0.2)
    alpha0 = ns_numbers(spectra).alpha0
    for q in (alpha0, 2.0):
        nu = power_transform(mu, q)
        ecc = eccentricity(nu)
        assert ecc.is_eccentric
        assert dixmier_trace(nu, nu).value == 1.0


def test_cycle_pipeline():
    mu, p, _ = spectral_mu(torus_spectrum(1, 1024))
    assert 1 / p == pytest.approx(1, abs=0.1)
