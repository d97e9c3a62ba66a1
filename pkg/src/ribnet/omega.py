"""The even differential Omega on the nodal curve.

On each component Omega pulls back to ``f(z) dz`` with only simple poles, so
``f(z) = sum_p res_p / (z - p)`` over the finite poles; a pole at infinity
carries residue ``-sum(finite residues)``.  Node branches may be poles, with
opposite residues on the two branches.  All conditions on Omega (prescribed
residues, evenness, node matching, prescribed zeros) are linear in the
residues, so Omega is found by one least-squares solve.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial import polynomial as npoly

from .curve import PointOnCurve, SpectralCurveData, require_valid, sigma_image
from .errors import OmegaNotFound

CERT_TOL = 1e-10
SUM_TOL = 1e-12


@dataclass(frozen=True)
class ComponentDifferential:
    """``f(z) dz`` on one component, stored by poles and residues."""

    component: int
    poles: tuple[PointOnCurve, ...]
    residues: np.ndarray
    zeros: tuple[PointOnCurve, ...]

    def finite(self):
        mask = np.array([not p.at_infinity for p in self.poles], dtype=bool)
        z = np.array([p.coordinate for p in self.poles if not p.at_infinity], dtype=complex)
        return z, self.residues[mask]

    def __call__(self, z):
        """Value of f at affine coordinate(s) z."""
        pz, pr = self.finite()
        z = np.asarray(z, dtype=complex)
        return np.sum(pr / (z[..., None] - pz), axis=-1)

    def residue_at(self, p: PointOnCurve) -> complex:
        return complex(self.residues[self.poles.index(p)])

    @property
    def numerator(self) -> np.ndarray:
        """Low-to-high coefficients of the numerator of f."""
        pz, pr = self.finite()
        num = np.zeros(1, dtype=complex)
        for k in range(len(pz)):
            term = np.array([pr[k]])
            for q in np.delete(pz, k):
                term = npoly.polymul(term, [-q, 1.0])
            num = npoly.polyadd(num, term)
        return num

    @property
    def denominator(self) -> np.ndarray:
        pz, _ = self.finite()
        return npoly.polyfromroots(pz) if len(pz) else np.ones(1, dtype=complex)


@dataclass(frozen=True)
class OmegaData:
    components: dict[int, ComponentDifferential]
    residues_r: tuple[float, ...]
    residues_q: tuple[complex, ...]
    nullity: int
    condition_number: float
    checks: dict[str, float] = field(default_factory=dict)

    def residue(self, p: PointOnCurve) -> complex:
        return self.components[p.component].residue_at(p)

    def __call__(self, p: PointOnCurve) -> complex:
        return complex(self.components[p.component](p.coordinate))

    def to_dict(self) -> dict:
        return {
            "residues_r": list(self.residues_r),
            "residues_q": [[z.real, z.imag] for z in self.residues_q],
            "nullity": self.nullity,
            "condition_number": self.condition_number,
            "checks": dict(self.checks),
            "components": {
                str(cid): {
                    "poles": [_pt(p) for p in cd.poles],
                    "residues": [[r.real, r.imag] for r in cd.residues],
                    "zeros": [_pt(p) for p in cd.zeros],
                    "numerator": [[c.real, c.imag] for c in cd.numerator],
                    "denominator": [[c.real, c.imag] for c in cd.denominator],
                }
                for cid, cd in sorted(self.components.items())
            },
        }


def _pt(p: PointOnCurve):
    return [p.component, "inf" if p.at_infinity else p.coordinate.real]


def _candidate_poles(S: SpectralCurveData) -> list[PointOnCurve]:
    pts = list(S.Q) + list(S.R) + [sigma_image(S, r) for r in S.R[: S.l]]
    pts += [b for nd in S.nodes for b in (nd.branch_a, nd.branch_b)]
    seen, out = set(), []
    for p in pts:
        if p not in seen:
            seen.add(p)
            out.append(p)
    return out


def _prescribed_zeros(S: SpectralCurveData) -> list[PointOnCurve]:
    return list(S.P) + list(S.gamma) + [sigma_image(S, g) for g in S.gamma]


def build_omega(S: SpectralCurveData, tol: float = CERT_TOL) -> OmegaData:
    """Solve for Omega and certify every defining condition.

    Raises OmegaNotFound when the linear conditions are inconsistent or the
    solution fails certification (a prescribed pole with zero residue, extra
    zeros, broken evenness).
    """
    require_valid(S)
    poles = _candidate_poles(S)
    index = {p: k for k, p in enumerate(poles)}
    zeros = _prescribed_zeros(S)
    m = len(poles)
    rows, rhs = [], []

    def row():
        r = np.zeros(m, dtype=complex)
        rows.append(r)
        rhs.append(0.0)
        return r

    cids = [c.id for c in S.components]
    for cid in cids:
        r = row()
        for p in poles:
            if p.component == cid:
                r[index[p]] = 1.0
    for q in S.Q:
        row()[index[q]] = 1.0
        rhs[-1] = 1.0
    for nd in S.nodes:
        r = row()
        r[index[nd.branch_a]] += 1.0
        r[index[nd.branch_b]] += 1.0
    for p in poles:
        sp = sigma_image(S, p)
        if index[sp] > index[p]:
            r = row()
            r[index[p]] = 1.0
            r[index[sp]] = -1.0
    for z0 in zeros:
        r = row()
        for p in poles:
            if p.component != z0.component or p.at_infinity:
                continue
            if z0.at_infinity:
                r[index[p]] = p.coordinate
            else:
                r[index[p]] = 1.0 / (z0.coordinate - p.coordinate)

    A = np.array(rows)
    b = np.array(rhs, dtype=complex)
    sol, _, rank, sv = np.linalg.lstsq(A, b, rcond=None)
    nullity = m - int(rank)
    cond = float(sv[0] / sv[rank - 1]) if rank else float("inf")
    resid = float(np.max(np.abs(A @ sol - b)))
    if resid > tol:
        raise OmegaNotFound(f"conditions on Omega are inconsistent (residual {resid:.3e})")

    comps = {}
    for cid in cids:
        cp = tuple(p for p in poles if p.component == cid)
        cz = tuple(z for z in zeros if z.component == cid)
        comps[cid] = ComponentDifferential(cid, cp, np.array([sol[index[p]] for p in cp]), cz)

    omega = OmegaData(
        components=comps,
        residues_r=tuple(float(sol[index[S.R[a]]].real) for a in range(S.l)),
        residues_q=tuple(complex(sol[index[q]]) for q in S.Q),
        nullity=nullity,
        condition_number=cond,
    )
    checks = certify_omega(S, omega, tol)
    object.__setattr__(omega, "checks", checks)
    return omega


def certify_omega(S: SpectralCurveData, omega: OmegaData, tol: float = CERT_TOL) -> dict[str, float]:
    """Return the residual of every condition on Omega; raise if any fails."""
    failures = []
    checks: dict[str, float] = {}

    checks["q_residue"] = max(abs(omega.residue(q) - 1.0) for q in S.Q)
    checks["r_evenness"] = max(
        (abs(omega.residue(S.R[a]) - omega.residue(sigma_image(S, S.R[a]))) for a in range(S.l)), default=0.0
    )
    checks["node_sum"] = max(
        (abs(omega.residue(nd.branch_a) + omega.residue(nd.branch_b)) for nd in S.nodes), default=0.0
    )
    checks["component_sum"] = max(abs(complex(np.sum(cd.residues))) for cd in omega.components.values())
    all_res = np.concatenate([cd.residues for cd in omega.components.values()])
    checks["imag"] = float(np.max(np.abs(all_res.imag)))
    scale = max(1.0, float(np.max(np.abs(all_res))))

    zero_res = 0.0
    for z0 in _prescribed_zeros(S):
        cd = omega.components[z0.component]
        pz, pr = cd.finite()
        # relative cancellation among the partial-fraction terms
        terms = pr * pz if z0.at_infinity else pr / (z0.coordinate - pz)
        v = abs(np.sum(terms)) / max(float(np.sum(np.abs(terms))), 1e-300)
        zero_res = max(zero_res, float(v))
    checks["zeros"] = zero_res

    # evenness of f dz under sigma at sample points
    rng = np.random.default_rng(0)
    even = 0.0
    for c in S.components:
        zs = rng.uniform(-2, 2, 8) + 1j * rng.uniform(-2, 2, 8)
        sgn = -1.0 if c.sigma_is_negation else 1.0
        mine = omega.components[c.id](zs)
        theirs = sgn * omega.components[c.sigma_partner](sgn * zs)
        even = max(even, float(np.max(np.abs(mine - theirs) / np.maximum(np.abs(mine), 1e-300))))
    checks["evenness"] = even

    smallest = min(float(np.min(np.abs(cd.residues))) for cd in omega.components.values())
    checks["min_pole_residue"] = smallest
    extra = 0
    for cd in omega.components.values():
        extra = max(extra, len(cd.poles) - 2 - len(cd.zeros))
    checks["extra_zeros"] = float(extra)

    if checks["q_residue"] > tol:
        failures.append("residue at Q != 1")
    if checks["r_evenness"] > tol:
        failures.append("Res_R != Res_sigmaR")
    if checks["node_sum"] > tol:
        failures.append("node residues not opposite")
    if checks["component_sum"] > SUM_TOL * scale:
        failures.append("component residue sum != 0")
    if checks["imag"] > tol:
        failures.append("residues not real")
    if checks["zeros"] > tol:
        failures.append("Omega does not vanish on P + gamma + sigma(gamma)")
    if checks["evenness"] > tol:
        failures.append("Omega is not even")
    if smallest < tol:
        failures.append("a prescribed pole has zero residue")
    if any(len(cd.poles) - 2 != len(cd.zeros) for cd in omega.components.values()):
        failures.append("zero divisor is not exactly P + gamma + sigma(gamma)")
    if failures:
        raise OmegaNotFound("; ".join(failures))
    return checks


def residues(omega: OmegaData) -> list[float]:
    return list(omega.residues_r)


def degree_bookkeeping(omega: OmegaData) -> dict[int, int]:
    """#zeros - #poles per component; -2 for every certified Omega."""
    return {cid: len(cd.zeros) - len(cd.poles) for cid, cd in omega.components.items()}
