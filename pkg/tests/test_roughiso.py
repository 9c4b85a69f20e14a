import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from asymdim.dimension import asymptotic_dimension, asymptotic_dimension_volume, box_dimension
from asymdim.errors import DomainError, SpecError
from asymdim.roughiso import (
    discretize, load_map, point_map, verify_bilipschitz, verify_rough_isometry,
)
from asymdim.spaces import (
    PointCloudSpace, grid_cube, lattice, perturb_edge_weights, region_alpha,
)


def doubling_map(n_src=32, n_dst=64):
    X, Y = lattice(1, budget=n_src), lattice(1, budget=n_dst)
    return X, Y, point_map(X, Y, "scaling", 2.0)


def test_doubling_map_on_integers():
    X, Y, f = doubling_map()
    w = verify_rough_isometry(X, Y, f)
    assert (w.a, w.b, w.eps, w.ok, w.violations) == (2.0, 0.0, 1.0, True, [])
    bl = verify_bilipschitz(X, Y, f)
    assert (bl.c1, bl.c2, bl.ok) == (2.0, 2.0, True)


def test_identity():
    Z2 = lattice(2, budget=10)
    ident = np.arange(Z2.size)
    w = verify_rough_isometry(Z2, Z2, ident)
    assert (w.a, w.b, w.eps, w.ok) == (1.0, 0.0, 0.0, True)
    bl = verify_bilipschitz(Z2, Z2, ident)
    assert (bl.c1, bl.c2) == (1.0, 1.0)


def test_axis_in_plane_is_not_a_net():
    X, Y = lattice(1, budget=100), lattice(2, budget=100)
    w = verify_rough_isometry(X, Y, point_map(X, Y), budget=2000)
    assert w.a == 1.0 and w.b == 0.0
    assert not w.ok and w.eps > 32
    kind, y, _ = w.violations[0]
    assert kind == "eps"
    assert abs(Y.coords[y, 1]) == w.eps


def test_net_gap_grows_with_the_ball():
    gaps = []
    for R in (10, 20, 40):
        X, Y = lattice(1, budget=R), lattice(2, budget=R)
        gaps.append(verify_rough_isometry(X, Y, point_map(X, Y)).eps)
    assert gaps == [10.0, 20.0, 40.0]


def test_map_validation():
    X, Y, f = doubling_map()
    with pytest.raises(DomainError):
        verify_rough_isometry(X, Y, f[:-1])
    with pytest.raises(DomainError):
        verify_bilipschitz(X, Y, np.full(X.size, Y.size))


def test_perturbed_lattice_weights_are_bilipschitz():
    g = lattice(2, budget=8).graph()
    h = perturb_edge_weights(g, seed=11)
    bl = verify_bilipschitz(g, h, np.arange(g.size))
    assert 1.0 <= bl.c1 <= bl.c2 <= 2.0 and bl.ok


def test_sampled_witness_is_seeded():
    X, Y = lattice(2, budget=20), lattice(2, budget=20)
    f = np.arange(X.size)
    a = verify_rough_isometry(X, Y, f, budget=300, seed=5)
    b = verify_rough_isometry(X, Y, f, budget=300, seed=5)
    assert a.to_dict() == b.to_dict() and a.pairs_sampled == 300


# -- discretization ---------------------------------------------------------------


def test_lattice_discretizes_to_itself():
    Z2 = lattice(2, budget=8)
    g = discretize(Z2, 1.0, 1.0)
    assert g.size == Z2.size
    assert np.array_equal(g.net, np.arange(Z2.size))
    assert np.array_equal(g.distances_from(g.base), Z2.distances_between(Z2.base,
                                                                         np.arange(Z2.size)))


def test_five_point_line_net():
    X = PointCloudSpace(np.arange(5.0))
    g = discretize(X, 2.5, 2.5)
    assert g.net.tolist() == [0, 3]
    assert g.owner.tolist() == [0, 0, 1, 1, 1]
    assert g.weights.tolist() == [2.0, 3.0]


def test_discretize_rejects_bad_radii_and_handles_empty():
    X = PointCloudSpace(np.arange(5.0))
    with pytest.raises(DomainError):
        discretize(X, 2.0, 1.0)
    assert discretize(PointCloudSpace(np.empty((0, 1))), 1.0, 1.0).size == 0


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 40), st.integers(0, 10_000), st.floats(0.1, 1.5), st.floats(1.0, 2.0))
def test_discretization_is_separated_net(n, seed, eps, k):
    pts = np.random.default_rng(seed).uniform(0, 4, size=(n, 2))
    X = PointCloudSpace(pts, weights=np.random.default_rng(seed).uniform(0.5, 2, n))
    g = discretize(X, eps, k * eps)
    D = np.linalg.norm(pts[:, None] - pts[None], axis=-1)
    sub = D[np.ix_(g.net, g.net)]
    assert np.all(sub[~np.eye(len(g.net), dtype=bool)] >= eps)
    assert np.all(D[:, g.net].min(axis=1) < 2 * eps)
    assert g.weights.sum() == pytest.approx(X.weights.sum())


def test_region_discretization_keeps_dimension():
    X = region_alpha(0.5)
    g = discretize(X, 1.0, 1.0)
    dX = asymptotic_dimension_volume(X).limsup_slope
    dG = asymptotic_dimension_volume(g).limsup_slope
    assert dG == pytest.approx(1.5, abs=0.15)
    assert abs(dX - dG) <= 0.15
    w = verify_rough_isometry(X, g, g.owner, budget=500)
    assert w.ok and w.eps == 0.0


# -- invariance -------------------------------------------------------------------


@pytest.mark.parametrize("d", [1, 2])
def test_scaled_lattice_keeps_asymptotic_dimension(d):
    Z = lattice(d)
    S = PointCloudSpace(2 * Z.coords, Z.blocks, base=Z.base, radius_budget=128, edge_length=2.0)
    f = point_map(Z, S, "scaling", 2.0)
    assert verify_rough_isometry(Z, S, f).ok
    assert abs(asymptotic_dimension(Z).limsup_slope
               - asymptotic_dimension(S, R_max=128).limsup_slope) <= 0.15


def test_box_dimension_survives_doubling():
    X = grid_cube(2, 1 / 64)
    Y = PointCloudSpace(2 * X.coords, X.blocks, weights=X.weights)
    f = point_map(X, Y, "scaling", 2.0)
    assert verify_bilipschitz(X, Y, f, budget=500).c2 == pytest.approx(2.0)
    a = box_dimension(X, r_min=2.0 ** -6, r_max=2.0 ** -3).limsup_slope
    b = box_dimension(Y, r_min=2.0 ** -5, r_max=2.0 ** -2).limsup_slope
    assert abs(a - b) <= 0.15


# -- map files --------------------------------------------------------------------


def test_load_map(tmp_path):
    p = tmp_path / "f.map"
    p.write_text("# doubling\n0 0\n1 2  # trailing comment\n\n2 4\n")
    assert load_map(p, 3).tolist() == [0, 2, 4]
    p.write_text("0 0\n2 4\n")
    with pytest.raises(SpecError, match="source point 1"):
        load_map(p, 3)
    p.write_text("0 0 0\n")
    with pytest.raises(SpecError, match="line 1"):
        load_map(p, 1)


def test_unknown_builtin_map():
    Z = lattice(1, budget=4)
    with pytest.raises(SpecError):
        point_map(Z, Z, "rotation")
