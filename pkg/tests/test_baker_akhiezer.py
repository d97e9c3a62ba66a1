"""The Baker-Akhiezer linear system, its solution and u-derivatives."""

import numpy as np
import pytest

from ribnet import PointOnCurve, assemble_system, eval_psi, leading_coeffs, partial_psi, solve_psi
from ribnet.baker_akhiezer import ba_system
from ribnet.curve import random_points
from ribnet.errors import DimensionMismatch, EvalAtEssentialSingularity, EvalAtPole, SingularSystem
from ribnet.ribaucour import apply_swaps


def test_system_size(ds2, ds3):
    A, b = assemble_system(ds2, np.zeros(2))
    assert A.shape == (5, 5) and b.shape == (5,)
    A, _ = assemble_system(ds3, np.zeros(3))
    assert A.shape == (len(ds3.nodes) + ds3.l, len(ds3.nodes) + ds3.l)


def test_zero_rhs(ds2):
    _, b = assemble_system(ds2, np.array([0.3, -0.2]), np.zeros(1))
    assert not np.any(b)


def test_wrong_d_length(ds2):
    with pytest.raises(DimensionMismatch):
        assemble_system(ds2, np.zeros(2), np.ones(3))


def test_only_exponential_rows_move(ds3):
    sysm = ba_system(ds3)
    A0, _ = assemble_system(ds3, np.zeros(3))
    A1, _ = assemble_system(ds3, np.array([0.4, -0.7, 0.2]))
    exp_cols = np.zeros(A0.shape[1], dtype=bool)
    for j in range(ds3.n):
        exp_cols[sysm.blocks[ds3.p_component(j)]] = True
    moved = np.any(A0 != A1, axis=1)
    assert np.any(moved)
    for row in np.flatnonzero(moved):
        assert np.any(exp_cols & ((A0[row] != 0) | (A1[row] != 0)))
    assert np.array_equal(A0[~moved], A1[~moved])


def test_d_zero_gives_zero(ds3):
    sol = solve_psi(ds3, np.array([0.1, 0.5, -0.3]), np.zeros(2), order=1)
    assert np.linalg.norm(sol.coeffs) == 0.0
    assert np.linalg.norm(sol.dcoeffs) == 0.0
    xi0, xi1 = leading_coeffs(sol, 0)
    assert xi0 == 0 and xi1 == 0


@pytest.mark.parametrize("swaps", [(), (0,), (1,), (0, 1)])
def test_normalization(ds3, rng, swaps):
    S = apply_swaps(ds3, swaps)
    d = rng.normal(size=S.l + S.N)
    for u in rng.uniform(-1, 1, (5, S.n)):
        sol = solve_psi(S, u, d)
        for a in range(S.l):
            assert abs(eval_psi(sol, S.physical_R(a)) - d[a]) < 1e-10


def test_nodes_match(ds3, rng):
    u = rng.uniform(-1, 1, 3)
    sol = solve_psi(ds3, u)
    for nd in ds3.nodes:
        va, vb = eval_psi(sol, nd.branch_a), eval_psi(sol, nd.branch_b)
        assert abs(va - vb) < 1e-10 * max(1.0, abs(va))


def test_real_points_give_real_values(dsN, rng):
    for u in rng.uniform(-1, 1, (5, 2)):
        sol = solve_psi(dsN, u)
        assert np.max(np.abs(sol.coeffs.imag)) < 1e-10
        for p in random_points(dsN, rng, 20, complex_points=False):
            assert abs(eval_psi(sol, p).imag) < 1e-10


def test_eval_at_pole(ds2):
    sol = solve_psi(ds2, np.array([0.2, 0.1]))
    with pytest.raises(EvalAtPole):
        eval_psi(sol, ds2.gamma[0])


def test_eval_at_essential_singularity(ds2):
    sol = solve_psi(ds2, np.array([0.2, 0.1]))
    with pytest.raises(EvalAtEssentialSingularity):
        eval_psi(sol, ds2.P[1])


def test_xi0_fixture(ds2):
    # at u = 0 the constant 1 satisfies every condition, so psi == 1
    xi0, xi1 = leading_coeffs(solve_psi(ds2, np.zeros(2)), 0)
    assert abs(xi0 - 1.0) < 1e-14 and abs(xi1) < 1e-14
    # value recorded when the dataset was authored
    xi0, _ = leading_coeffs(solve_psi(ds2, np.array([0.5, 0.5])), 0)
    assert abs(xi0 - 0.771778546411149) < 1e-12


def test_xi0_scales_with_d(ds3):
    u = np.array([0.3, 0.2, -0.6])
    a = leading_coeffs(solve_psi(ds3, u, [1.0, 1.0]), 1)[0]
    b = leading_coeffs(solve_psi(ds3, u, [2.5, 2.5]), 1)[0]
    assert abs(b - 2.5 * a) < 1e-13 * abs(b)


def test_xi0_is_limit_of_rational_part(ds2):
    u = np.array([0.01, -0.3])
    sol = solve_psi(ds2, u)
    xi0, xi1 = leading_coeffs(sol, 0)
    for z in (1e2, 1e3):
        rational = eval_psi(sol, PointOnCurve(ds2.P[0].component, z)) * np.exp(-ds2.rho[0] * z * u[0])
        assert abs(rational - (xi0 + xi1 / (ds2.rho[0] * z))) < 10.0 / z**2


def test_linear_in_d(ds3, rng):
    u = rng.uniform(-1, 1, 3)
    d1, d2 = rng.normal(size=2), rng.normal(size=2)
    lhs = solve_psi(ds3, u, 2.0 * d1 - 3.0 * d2).coeffs
    rhs = 2.0 * solve_psi(ds3, u, d1).coeffs - 3.0 * solve_psi(ds3, u, d2).coeffs
    assert np.linalg.norm(lhs - rhs) < 1e-13 * np.linalg.norm(lhs)


def test_batch_matches_single(ds3, rng):
    U = rng.uniform(-1, 1, (4, 3))
    batch = solve_psi(ds3, U, order=2)
    for k, u in enumerate(U):
        one = solve_psi(ds3, u, order=2)
        np.testing.assert_allclose(batch.coeffs[k], one.coeffs, rtol=1e-13, atol=1e-15)
        np.testing.assert_allclose(batch.d2coeffs[:, :, k], one.d2coeffs, rtol=1e-12, atol=1e-14)


def test_derivative_vanishes_at_R(ds3, rng):
    u = rng.uniform(-1, 1, 3)
    for i in range(3):
        der = partial_psi(ds3, u, None, i)
        for a in range(ds3.l):
            assert abs(der.eval(ds3.physical_R(a))) < 1e-12


def test_gradient_against_central_differences(ds3, rng):
    h = 1e-5
    worst = 0.0
    for p in random_points(ds3, rng, 10):
        u = rng.uniform(-1, 1, 3)
        sol = solve_psi(ds3, u, order=1)
        an = np.array([sol.partial(p, i) for i in range(3)])
        fd = np.array([(solve_psi(ds3, u + h * e).value(p) - solve_psi(ds3, u - h * e).value(p)) / (2 * h)
                       for e in np.eye(3)])
        worst = max(worst, np.linalg.norm(an - fd) / np.linalg.norm(an))
    assert worst < 1e-6


def test_second_derivatives(ds3, rng):
    h = 1e-4
    for p in random_points(ds3, rng, 4):
        u = rng.uniform(-1, 1, 3)
        sol = solve_psi(ds3, u, order=2)
        for i in range(3):
            for k in range(3):
                e_i, e_k = h * np.eye(3)[i], h * np.eye(3)[k]
                f = lambda v: solve_psi(ds3, v).value(p)  # noqa: E731
                fd = (f(u + e_i + e_k) - f(u + e_i - e_k) - f(u - e_i + e_k) + f(u - e_i - e_k)) / (4 * h * h)
                an = sol.partial2(p, i, k)
                scale = max(abs(an), np.max(np.abs([sol.partial(p, j) for j in range(3)])), abs(sol.value(p)))
                assert abs(an - fd) < 1e-4 * scale


def test_d_zero_derivative(ds2):
    der = partial_psi(ds2, np.array([0.1, 0.2]), np.zeros(1), 1)
    assert np.linalg.norm(der.coeffs) == 0.0


def test_singular_single_point_raises(monkeypatch, ds2):
    import ribnet.baker_akhiezer as ba

    monkeypatch.setattr(ba, "COND_LIMIT", 0.5)
    with pytest.raises(SingularSystem):
        solve_psi(ds2, np.array([0.1, 0.2]))
    sol = solve_psi(ds2, np.zeros((3, 2)))
    assert sol.singular.all() and np.isnan(sol.coeffs).all()
