"""The even differential Omega and its residues."""

from dataclasses import replace

import numpy as np
import pytest

from ribnet import PointOnCurve, build_omega, residues, sigma_image
from ribnet.datasets import SHIPPED, load_dataset
from ribnet.errors import OmegaNotFound
from ribnet.omega import certify_omega, degree_bookkeeping
from ribnet.ribaucour import apply_swaps

# residues pinned when the datasets were authored
R_FIXTURE = {
    "ds-n2-l1": [-1.0],
    "ds-n3-l2": [-0.345, -1.155],
    "ds-n2-N1-l1": [-1.398],
}


@pytest.fixture(scope="module", params=SHIPPED)
def named(request):
    S = load_dataset(request.param)
    return request.param, S, build_omega(S)


def test_residues_pinned(named):
    name, _, om = named
    np.testing.assert_allclose(residues(om), R_FIXTURE[name], rtol=0, atol=1e-12)
    assert all(r != 0.0 for r in residues(om))


def test_q_residues_are_one(named):
    _, S, om = named
    for q in S.Q:
        assert abs(om.residue(q) - 1.0) < 1e-10


def test_r_residues_even(named):
    _, S, om = named
    for a in range(S.l):
        assert abs(om.residue(S.R[a]) - om.residue(sigma_image(S, S.R[a]))) < 1e-10
        assert abs(om.residue(S.R[a]) - om.residues_r[a]) < 1e-12


def test_component_and_node_sums(named):
    _, S, om = named
    for cd in om.components.values():
        assert abs(np.sum(cd.residues)) < 1e-12
    for nd in S.nodes:
        assert abs(om.residue(nd.branch_a) + om.residue(nd.branch_b)) < 1e-12


def test_degree_bookkeeping(named):
    _, _, om = named
    assert set(degree_bookkeeping(om).values()) == {-2}


def test_vanishes_at_prescribed_zeros(named):
    _, S, om = named
    for g in S.gamma:
        for p in (g, sigma_image(S, g)):
            cd = om.components[p.component]
            if p.at_infinity:
                continue
            scale = np.sum(np.abs(cd.finite()[1] / (p.coordinate - cd.finite()[0])))
            assert abs(om(p)) < 1e-10 * scale


def test_evenness_at_random_points(ds3, rng):
    om = build_omega(ds3)
    for cid in om.components:
        comp = ds3.component(cid)
        for z in rng.uniform(-3, 3, 5) + 1j * rng.uniform(-3, 3, 5):
            p = PointOnCurve(cid, complex(z))
            q = sigma_image(ds3, p)
            # f(z)dz pulled back by z -> -z picks up a sign from dz
            sign = -1.0 if comp.sigma_is_negation else 1.0
            assert abs(om(p) - sign * om(q)) < 1e-10 * (1 + abs(om(p)))


def test_numerator_denominator_agree_with_partial_fractions(ds2):
    om = build_omega(ds2)
    for cd in om.components.values():
        z = 0.37 + 0.21j
        val = np.polynomial.polynomial.polyval(z, cd.numerator) / np.polynomial.polynomial.polyval(z, cd.denominator)
        assert abs(val - cd(z)) < 1e-12 * (1 + abs(val))


def test_swap_leaves_omega_unchanged(ds3):
    base = build_omega(ds3).residues_r
    for alphas in ([0], [1], [0, 1]):
        assert build_omega(apply_swaps(ds3, alphas)).residues_r == pytest.approx(base, abs=1e-14)


def test_checks_recorded(ds2):
    om = build_omega(ds2)
    assert om.nullity == 0
    assert certify_omega(ds2, om)["q_residue"] < 1e-10


def test_inconsistent_data_raises(ds2):
    # moving gamma off the zero of Omega leaves the linear system inconsistent
    g = ds2.gamma[0]
    bad = replace(ds2, gamma=(PointOnCurve(g.component, g.coordinate.real + 0.3),))
    with pytest.raises(OmegaNotFound):
        build_omega(bad)
