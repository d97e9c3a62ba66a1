"""Swaps, Ribaucour pairs, the lemma identities, Bianchi cubes and the l = 1 inversion."""

import numpy as np
import pytest

from ribnet import (
    Grid,
    bianchi_cube,
    build_omega,
    closed_form_l1,
    concircularity_check,
    lemma_identities,
    ribaucour_pair,
    sigma_image,
    solve_psi,
    swap_data,
)
from ribnet.curve import random_points
from ribnet.errors import CollinearTriple, DegeneratePoint, IndexOutOfRange, PreconditionViolated
from ribnet.ribaucour import apply_swaps, check_path_independence, phi_connection

G2 = Grid.interval(2, count=17)
G3 = Grid.interval(3, count=9)


def test_swap_is_involution(ds3):
    for a in range(ds3.l):
        assert swap_data(swap_data(ds3, a), a) == ds3
        assert swap_data(ds3, a) != ds3


def test_swaps_commute(ds3):
    assert swap_data(swap_data(ds3, 0), 1) == swap_data(swap_data(ds3, 1), 0)
    assert check_path_independence(ds3, 0b11)


def test_swap_touches_only_its_flag(ds3):
    t = swap_data(ds3, 1)
    assert t.swap_state == (False, True)
    assert (t.R, t.gamma, t.nodes, t.d) == (ds3.R, ds3.gamma, ds3.nodes, ds3.d)


@pytest.mark.parametrize("alpha", [-1, 2, 3])
def test_swap_out_of_range(ds3, alpha):
    with pytest.raises(IndexOutOfRange):
        swap_data(ds3, alpha)


def test_fixed_R_not_swappable(dsN):
    with pytest.raises(IndexOutOfRange):
        swap_data(dsN, 1)


def test_swapped_twice_nets_identical(ds3):
    u = G3.points()
    a = solve_psi(ds3, u, strict=False).coeffs
    b = solve_psi(apply_swaps(ds3, [0, 1, 0, 1]), u, strict=False).coeffs
    assert np.array_equal(a, b)


@pytest.mark.parametrize("name,alpha", [("ds2", 0), ("ds3", 0), ("ds3", 1), ("dsN", 0)])
def test_pair_certified(request, name, alpha):
    S = request.getfixturevalue(name)
    rep = ribaucour_pair(S, alpha, G2 if S.n == 2 else G3)
    assert rep.ok, rep.summary()
    good = ~rep.degenerate
    assert np.max(rep.residual_ribtrans[good]) < 1e-8
    assert np.max(np.abs(rep.lambda_ratio - rep.lambda_fit)[good] / np.abs(rep.lambda_ratio[good])) < 1e-8
    assert rep.lambda_imag < 1e-10
    assert np.all(np.abs(rep.phi_alpha[good] - 1) > 1e-12)


def test_reflection_preserves_lengths(ds3):
    rep = ribaucour_pair(ds3, 1, G3)
    good = ~rep.degenerate
    lhs = rep.first_norm_t[good]
    rhs = np.abs(rep.lambda_ratio[good]) * rep.first_norm[good]
    assert np.max(np.abs(lhs - rhs) / rhs) < 1e-8


def test_touching_point_is_degenerate(ds2):
    # u = 0 makes psi constant for every swap state, so the nets touch there
    rep = ribaucour_pair(ds2, 0, G2)
    centre = np.flatnonzero(np.all(rep.u == 0.0, axis=-1))
    assert rep.degenerate[centre].all()
    assert rep.degenerate.sum() == 1


def test_identity_short_circuit(ds2):
    rep = ribaucour_pair(ds2, 0, G2, target=ds2)
    assert rep.identity and rep.ok
    assert rep.summary()["identity"] is True


def test_lemma_identities(ds3, rng):
    for a in range(ds3.l):
        res = lemma_identities(ds3, a, rng.uniform(-1, 1, (10, 3)), n_points=20).max()
        assert res["connection"] < 1e-8
        assert res["scalar_up"] < 1e-8
        assert res["scalar_down"] < 1e-8


def test_lemma_degenerate_single_point(ds2):
    with pytest.raises(DegeneratePoint):
        lemma_identities(ds2, 0, np.zeros(2))


def test_connection_vanishes_at_other_R(ds3, rng):
    for u in rng.uniform(-1, 1, (5, 3)):
        for i in range(3):
            other = ds3.physical_R(1)
            val = phi_connection(ds3, 0, u, i, other)
            ref = abs(phi_connection(ds3, 0, u, i, random_points(ds3, rng, 1)[0]))
            assert abs(val) < 1e-10 * max(ref, 1.0)


def test_d_zero_quantities_vanish(ds2, rng):
    S = ds2.with_d([0.0])
    u = rng.uniform(-1, 1, 2)
    p = random_points(S, rng, 1)[0]
    assert abs(phi_connection(S, 0, u, 0, p)) == 0.0
    sol = solve_psi(S, u)
    assert sol.value(sigma_image(S, S.R[0])) == 0.0


def test_cube_l1(ds2):
    cube = bianchi_cube(ds2, G2)
    assert len(cube.nets) == 2
    assert len(cube.edge_reports) == 1
    assert cube.concircularity == {}
    assert cube.ok


def test_cube_l2(ds3):
    cube = bianchi_cube(ds3, G3)
    assert len(cube.nets) == 4
    assert len(cube.edge_reports) == 4
    assert len(cube.concircularity) == 1
    assert cube.path_independent and cube.edges_ok
    assert cube.face_fraction((0, 0, 1)) >= 0.9
    assert cube.ok
    for rep in cube.net_reports.values():
        assert rep["orthogonality"]["ok"] and rep["conjugacy"]["ok"]


def test_concircular_points(rng):
    for _ in range(20):
        c = rng.normal(size=3)
        e1, e2 = np.linalg.qr(rng.normal(size=(3, 2)))[0].T
        r = rng.uniform(0.5, 2)
        # quarter-turn spacing keeps the circle through the first three well conditioned
        t = rng.uniform(0, 2 * np.pi) + np.arange(4) * np.pi / 2 + rng.uniform(-0.3, 0.3, 4)
        pts = [c + r * (np.cos(s) * e1 + np.sin(s) * e2) for s in t]
        assert concircularity_check(*pts) < 1e-12 * max(1.0, r)


def test_generic_points_not_concircular(rng):
    for _ in range(20):
        assert concircularity_check(*rng.normal(size=(4, 3))) > 1e-6


def test_collinear_triple():
    a = np.zeros(3)
    with pytest.raises(CollinearTriple):
        concircularity_check(a, a + 1, a + 2, np.array([0.0, 1.0, 0.0]))


@pytest.mark.parametrize("name", ["ds2", "dsN"])
def test_closed_form(request, name):
    S = request.getfixturevalue(name)
    rep = closed_form_l1(S, G2)
    assert rep.c == pytest.approx(-2 * build_omega(S).residues_r[0], abs=1e-12)
    assert rep.max_deviation < 1e-10
    assert rep.norm_identity < 1e-10


def test_closed_form_scales_with_d1(ds2):
    # x and x_1 both scale by d_1, so c scales by d_1 squared
    rep = closed_form_l1(ds2, G2, d=[2.0])
    assert rep.max_deviation < 1e-10
    assert rep.c == pytest.approx(8.0, rel=1e-12)


def test_closed_form_preconditions(ds3, dsN):
    with pytest.raises(PreconditionViolated):
        closed_form_l1(ds3, G3)
    with pytest.raises(PreconditionViolated):
        closed_form_l1(dsN, G2, d=[1.0, 0.5])
