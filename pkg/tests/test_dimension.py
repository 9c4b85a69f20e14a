import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from asymdim.dimension import (
    DimensionConfig, ScaleSeries, asymptotic_dimension, asymptotic_dimension_volume,
    box_dimension, doubling_constant, dyadic, slope_limsup, uniform_bounded_check,
)
from asymdim.errors import ArityError, BudgetError, DomainError
from asymdim.spaces import OSC_A, PointCloudSpace, build_space, cantor, lattice
from asymdim.specs import make_spec, parse_inline


def test_exact_power_law_slope():
    x = 2.0 ** np.arange(1, 9)
    est = slope_limsup(ScaleSeries(x, x ** 2), 3, "all")
    assert est.limsup_slope == pytest.approx(2.0, abs=1e-12)
    assert est.liminf_slope == pytest.approx(2.0, abs=1e-12)


def test_constant_series_has_zero_slope():
    est = slope_limsup(ScaleSeries(dyadic(1, 64), np.full(7, 5.0)), 3)
    assert est.limsup_slope == pytest.approx(0.0, abs=1e-12)


def test_default_regime_is_upper_half():
    est = slope_limsup(ScaleSeries(dyadic(1, 512), dyadic(1, 512)), 3)
    assert est.regime == (5, 10)
    assert len(est.per_window_slopes) == 3


def test_too_few_samples():
    with pytest.raises(ArityError):
        slope_limsup(ScaleSeries([1, 2, 4], [1, 2, 4]), 3)
    with pytest.raises(ArityError):
        slope_limsup(ScaleSeries(dyadic(1, 64), dyadic(1, 64)), 1)


def test_series_validation():
    with pytest.raises(DomainError):
        ScaleSeries([1, 1, 2], [1, 2, 3])
    with pytest.raises(DomainError):
        ScaleSeries([1, 2, 3], [1, 0, 3])


@settings(max_examples=50, deadline=None)
@given(st.floats(-3, 3), st.floats(0.01, 100), st.integers(2, 5), st.integers(0, 10_000))
def test_slopes_ignore_constant_factors(p, c, window, seed):
    x = dyadic(1, 2 ** 10)
    noise = np.exp(np.random.default_rng(seed).normal(0, 0.1, len(x)))
    a = slope_limsup(ScaleSeries(x, x ** p * noise), window, "all")
    b = slope_limsup(ScaleSeries(x, c * x ** p * noise), window, "all")
    assert a.limsup_slope == pytest.approx(b.limsup_slope, abs=1e-9)
    assert a.liminf_slope <= a.limsup_slope


def test_oscillating_end_volume_slopes():
    E = build_space(make_spec("oscillating_end"))
    est = asymptotic_dimension_volume(E, R_values=OSC_A[2:9])
    assert est.limsup_slope >= 1.9
    assert est.liminf_slope <= 1.6


# -- box dimension --------------------------------------------------------------


def test_cantor_box_dimension():
    est = box_dimension(cantor(8))
    assert est.limsup_slope == pytest.approx(math.log(2) / math.log(3), abs=1e-9)
    assert est.diagnostics["counts"] == [2 ** m for m in range(1, 9)]


def test_integers_have_box_dimension_zero():
    assert box_dimension(lattice(1)).limsup_slope == pytest.approx(0, abs=1e-12)


def test_box_grid_override_beats_space_default():
    est = box_dimension(cantor(6), scale_ratio=2.0, r_min=2.0 ** -8, r_max=2.0 ** -3)
    assert est.diagnostics["grid"]["scale_ratio"] == 2.0


# -- asymptotic dimension --------------------------------------------------------


@pytest.mark.parametrize("d", [1, 2])
def test_lattice_asymptotic_dimension(d):
    est = asymptotic_dimension(lattice(d))
    assert est.limsup_slope == pytest.approx(d, abs=0.1)
    assert est.r_grid == (2.0, 4.0, 8.0)
    assert est.converged
    assert est.liminf_slope <= est.limsup_slope


def test_packing_counts_on_Z2_are_square_numbers():
    # greedy packing with separation 2r on the l1 lattice at R = 2^k + 1/2
    est = asymptotic_dimension(lattice(2), r_grid=(8.0,))
    assert est.diagnostics["counts"] == [1, 4, 9, 25, 81]


def test_radius_budget_is_enforced():
    with pytest.raises(BudgetError):
        asymptotic_dimension(lattice(2, budget=32), R_max=64)


def test_base_point_independence():
    Z2 = lattice(2)
    moved = Z2.index_of((3.0, 2.0))
    a = asymptotic_dimension(Z2, R_max=32)
    b = asymptotic_dimension(Z2, R_max=32, base=moved)
    assert abs(a.limsup_slope - b.limsup_slope) <= 0.05


@pytest.mark.parametrize("d", [1, 2])
def test_volume_and_packing_forms_agree_on_lattices(d):
    Z = lattice(d)
    assert abs(asymptotic_dimension(Z).limsup_slope
               - asymptotic_dimension_volume(Z).limsup_slope) <= 0.1


@pytest.mark.parametrize("D", [2.0, 2.5, 3.0])
def test_standard_end_volume_dimension(D):
    E = build_space(make_spec("standard_end", N=2, D=D))
    assert asymptotic_dimension_volume(E).limsup_slope == pytest.approx(D, abs=0.05)


def test_davies_end_volume_dimension():
    E = build_space(make_spec("davies_remark_end"))
    est = asymptotic_dimension_volume(E, R_max=2.0 ** 40)
    assert est.limsup_slope == pytest.approx(2, abs=0.1)
    R = np.asarray(est.diagnostics["radii"])
    ratio = np.array([E.volume(r) for r in R]) / R ** 2
    assert np.all(np.diff(ratio) > 0) and ratio[-1] / ratio[0] >= 2


def test_unbounded_catalogue_spaces_are_at_least_one():
    for tag in ("lattice:d=1", "lattice:d=2", "region:alpha=0.5"):
        est = asymptotic_dimension_volume(build_space(parse_inline(tag)))
        assert est.limsup_slope >= 0.9, tag


# -- uniform boundedness and doubling ---------------------------------------------


def test_lattice_uniform_bounds():
    rows, ok = uniform_bounded_check(lattice(2, budget=16), [0.5, 1.5, 2.5, 3.5])
    assert ok
    for r, b1, b2 in rows:
        k = math.floor(r)
        assert b1 == b2 == 2 * k * k + 2 * k + 1


def test_isolated_point_sets_lower_bound():
    X = PointCloudSpace(np.array([[0.0], [0.1], [0.2], [100.0]]), weights=[1, 1, 1, 0.25])
    rows, ok = uniform_bounded_check(X, [0.5], centers=[0, 3])
    assert ok and rows[0][1] == 0.25 and rows[0][2] == 3


def test_doubling_constants_bound_dimension():
    Z1, Z2 = lattice(1), lattice(2)
    A1 = doubling_constant(Z1, [(None, k + 0.5) for k in range(1, 20)])
    A2 = doubling_constant(Z2, [(None, k + 0.5) for k in range(1, 15)])
    assert A1 <= 2
    assert A2 == pytest.approx(4, abs=0.3) and A2 <= 4
    assert asymptotic_dimension(Z1).limsup_slope <= math.log2(A1) + 0.1
    assert asymptotic_dimension(Z2).limsup_slope <= math.log2(A2) + 0.1


def test_config_is_one_record():
    cfg = DimensionConfig(window=4, R_min=2, R_max=64)
    est = asymptotic_dimension(lattice(1), cfg)
    assert est.window == 4
