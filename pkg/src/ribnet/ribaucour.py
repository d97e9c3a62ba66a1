"""Ribaucour transformations generated by swapping R-points under sigma.

Swapping ``R_a -> sigma(R_a)`` in the data gives a second net ``x_a``.  The
pair is certified pointwise against the reflection relation

    d_i x_a = lambda_i (d_i x - 2 (d_i x . dx)/(dx . dx) dx),   dx = x_a - x,

with ``lambda_i`` computed both as a projection and as the ratio of leading
expansion coefficients at P_i.  The two residue identities behind the proof
(scalar products of ``d_i x`` and ``dx`` with ``dx``) and the proportionality
of the auxiliary function ``Phi`` to ``psi_a - psi`` are checked directly.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from functools import lru_cache
from itertools import combinations, permutations

import numpy as np

from .baker_akhiezer import BASolution, solve_psi
from .curve import PointOnCurve, SpectralCurveData, random_points, sigma_image
from .errors import CollinearTriple, DegeneratePoint, IndexOutOfRange, PreconditionViolated
from .net import Grid, OrthogonalNet, conjugacy_report, net_from_solution, orthogonality_report, solve_on_points
from .omega import build_omega

RIB_TOL = 1e-8
LAMBDA_TOL = 1e-8
LEMMA_TOL = 1e-8
CIRCLE_TOL = 1e-6
CLOSED_FORM_TOL = 1e-10
DELTA_MIN = 1e-14
PHI_MIN = 1e-12


def swap_data(S: SpectralCurveData, alpha: int) -> SpectralCurveData:
    """S with R_alpha replaced by sigma(R_alpha) (0-based alpha)."""
    if not 0 <= alpha < S.l:
        raise IndexOutOfRange(f"alpha={alpha + 1} but only R_1..R_{S.l} are movable")
    state = list(S.swap_state)
    state[alpha] = not state[alpha]
    return replace(S, swap_state=tuple(state))


def apply_swaps(S: SpectralCurveData, alphas) -> SpectralCurveData:
    for a in alphas:
        S = swap_data(S, a)
    return S


@lru_cache(maxsize=32)
def _omega_for(S: SpectralCurveData):
    return build_omega(S)


def omega_for(S: SpectralCurveData):
    """Omega depends only on the point set, not on d or the swap flags."""
    return _omega_for(replace(S, swap_state=(False,) * S.l, d=(1.0,) * len(S.R)))


# -- pointwise identities -----------------------------------------------------


def _vectors(S: SpectralCurveData, sol: BASolution):
    x = np.stack([sol.value(q) for q in S.Q], axis=-1)
    dx = np.stack([np.stack([sol.partial(q, i) for q in S.Q], axis=-1) for i in range(S.n)], axis=-2)
    return x, dx


def connection_residuals(S, alpha, sol, solt, points, i):
    """Phi_{i,a}(u, Q) and the right side of its proportionality to psi_a - psi.

    Returns (Phi, rhs, scale) arrays of shape batch + (len(points),).
    """
    xi0, _ = sol.leading_coeffs(i)
    xi0t, _ = solt.leading_coeffs(i)
    phi_pt = sigma_image(S, S.physical_R(alpha))
    phi = sol.value(phi_pt)
    dphi = sol.partial(phi_pt, i)
    coef = xi0t * dphi / (phi - 1.0)
    Phi, rhs, scale = [], [], []
    for p in points:
        a = xi0 * solt.partial(p, i)
        b = xi0t * sol.partial(p, i)
        Phi.append(a - b)
        rhs.append(coef * (solt.value(p) - sol.value(p)))
        scale.append(np.abs(a) + np.abs(b))
    return np.stack(Phi, -1), np.stack(rhs, -1), np.stack(scale, -1)


@dataclass(frozen=True)
class LemmaResiduals:
    connection: np.ndarray  # batch
    scalar_up: np.ndarray  # batch
    scalar_down: np.ndarray  # batch
    degenerate: np.ndarray  # batch, bool

    def max(self) -> dict:
        good = ~self.degenerate
        f = lambda v: float(np.max(v[good])) if np.any(good) else 0.0  # noqa: E731
        return {"connection": f(self.connection), "scalar_up": f(self.scalar_up),
                "scalar_down": f(self.scalar_down), "degenerate": int(np.sum(self.degenerate))}


def _identities(S, alpha, sol, solt, r_alpha, points):
    x, dx = _vectors(S, sol)
    xt, _ = _vectors(S, solt)
    delta = xt - x
    R_pt = S.physical_R(alpha)
    phi_pt = sigma_image(S, R_pt)
    phi = sol.value(phi_pt)
    phi_aa = solt.value(R_pt)
    dd = np.sum(delta * delta, axis=-1).real
    degenerate = sol.singular | solt.singular | (dd < DELTA_MIN) | (np.abs(phi - 1.0) < PHI_MIN)

    up = np.zeros(dd.shape)
    conn = np.zeros(dd.shape)
    for i in range(S.n):
        dphi = sol.partial(phi_pt, i)
        lhs = np.sum(dx[..., i, :] * delta, axis=-1)
        other = r_alpha * dphi * (phi_aa - 1.0)
        sc = np.linalg.norm(dx[..., i, :], axis=-1) * np.sqrt(np.abs(dd)) + np.abs(other)
        with np.errstate(all="ignore"):
            up = np.maximum(up, np.abs(lhs + other) / sc)
            Phi, rhs, scale = connection_residuals(S, alpha, sol, solt, points, i)
            conn = np.maximum(conn, np.max(np.abs(Phi - rhs) / scale, axis=-1))
    other = 2.0 * r_alpha * (phi - 1.0) * (phi_aa - 1.0)
    with np.errstate(all="ignore"):
        down = np.abs(dd - other) / (np.abs(dd) + np.abs(other))
    clean = lambda v: np.where(degenerate, 0.0, v)  # noqa: E731
    return LemmaResiduals(clean(conn), clean(up), clean(down), degenerate), phi, phi_aa, delta


def lemma_identities(S: SpectralCurveData, alpha: int, u, n_points: int = 20, seed: int = 0,
                     points: list[PointOnCurve] | None = None) -> LemmaResiduals:
    """Residuals of the connection identity and both scalar-product identities at u.

    ``u`` may be a single point or a batch; ``points`` defaults to n_points
    random regular complex points of the curve.
    """
    St = swap_data(S, alpha)
    r_alpha = omega_for(S).residues_r[alpha]
    u = np.asarray(u, dtype=float)
    sol = solve_psi(S, u, order=1, strict=False)
    solt = solve_psi(St, u, order=1, strict=False)
    if points is None:
        points = random_points(S, np.random.default_rng(seed), n_points)
    res, *_ = _identities(S, alpha, sol, solt, r_alpha, points)
    if u.ndim == 1 and res.degenerate:
        raise DegeneratePoint(f"nets touch or phi = 1 at u={u.tolist()}")
    return res


def phi_connection(S: SpectralCurveData, alpha: int, u, i: int, p: PointOnCurve):
    """Phi_{i,alpha}(u, p) evaluated directly."""
    sol = solve_psi(S, u, order=1)
    solt = solve_psi(swap_data(S, alpha), u, order=1)
    Phi, _, _ = connection_residuals(S, alpha, sol, solt, [p], i)
    return Phi[..., 0]


# -- pair report --------------------------------------------------------------


@dataclass(frozen=True)
class RibaucourReport:
    alpha: int
    u: np.ndarray
    lambda_ratio: np.ndarray  # (G, n)
    lambda_fit: np.ndarray  # (G, n)
    residual_ribtrans: np.ndarray  # (G,)
    residual_lambda: np.ndarray  # (G,)
    residual_scalar_up: np.ndarray
    residual_scalar_down: np.ndarray
    residual_connection: np.ndarray
    phi_alpha: np.ndarray
    phi_alpha_alpha: np.ndarray
    first_norm: np.ndarray  # (G, n) |d_i x|
    first_norm_t: np.ndarray  # (G, n) |d_i x_a|
    lambda_imag: float
    degenerate: np.ndarray
    identity: bool = False
    tol: dict = field(default_factory=dict)

    def summary(self) -> dict:
        good = ~self.degenerate
        f = lambda v: float(np.max(v[good])) if np.any(good) else 0.0  # noqa: E731
        out = {
            "alpha": self.alpha + 1,
            "identity": self.identity,
            "points": int(len(self.u)),
            "degenerate": int(np.sum(self.degenerate)),
            "ribtrans": f(self.residual_ribtrans),
            "lambda": f(self.residual_lambda),
            "scalar_up": f(self.residual_scalar_up),
            "scalar_down": f(self.residual_scalar_down),
            "connection": f(self.residual_connection),
            "lambda_imag": self.lambda_imag,
        }
        out["ok"] = bool(self.ok)
        return out

    @property
    def ok(self) -> bool:
        if self.identity:
            return True
        good = ~self.degenerate
        if not np.any(good):
            return False
        t = dict(ribtrans=RIB_TOL, lam=LAMBDA_TOL, lemma=LEMMA_TOL) | self.tol
        return bool(np.max(self.residual_ribtrans[good]) < t["ribtrans"]
                    and np.max(self.residual_lambda[good]) < t["lam"]
                    and np.max(self.residual_scalar_up[good]) < t["lemma"]
                    and np.max(self.residual_scalar_down[good]) < t["lemma"]
                    and np.max(self.residual_connection[good]) < t["lemma"])


def pair_report(S: SpectralCurveData, alpha: int, u: np.ndarray, sol: BASolution, solt: BASolution,
                n_points: int = 20, seed: int = 0, tol: dict | None = None) -> RibaucourReport:
    """Certify the pair built from already-solved psi (for S) and psi_a (for S_a)."""
    G = len(u)
    r_alpha = omega_for(S).residues_r[alpha]
    points = random_points(S, np.random.default_rng(seed), n_points)
    lem, phi, phi_aa, delta = _identities(S, alpha, sol, solt, r_alpha, points)
    x, dx = _vectors(S, sol)
    _, dxt = _vectors(S, solt)
    dx, dxt, delta = dx.real, dxt.real, delta.real
    dd = np.sum(delta * delta, axis=-1)

    lam_fit = np.zeros((G, S.n))
    lam_ratio = np.zeros((G, S.n), dtype=complex)
    rib = np.zeros(G)
    lam_res = np.zeros(G)
    with np.errstate(all="ignore"):
        for i in range(S.n):
            a = dx[:, i]
            v = a - 2.0 * (np.sum(a * delta, -1) / dd)[:, None] * delta
            b = dxt[:, i]
            lam = np.sum(b * v, -1) / np.sum(v * v, -1)
            rib = np.maximum(rib, np.linalg.norm(b - lam[:, None] * v, axis=-1) / np.linalg.norm(b, axis=-1))
            ratio = solt.leading_coeffs(i)[0] / sol.leading_coeffs(i)[0]
            lam_res = np.maximum(lam_res, np.abs(ratio - lam) / np.abs(lam))
            lam_fit[:, i] = lam
            lam_ratio[:, i] = ratio
    deg = lem.degenerate
    good = ~deg
    lam_imag = float(np.max(np.abs(lam_ratio.imag[good]))) if np.any(good) else 0.0
    zero = lambda v: np.where(deg, 0.0, v)  # noqa: E731
    return RibaucourReport(
        alpha=alpha, u=u, lambda_ratio=lam_ratio.real, lambda_fit=lam_fit,
        residual_ribtrans=zero(rib), residual_lambda=zero(lam_res),
        residual_scalar_up=lem.scalar_up, residual_scalar_down=lem.scalar_down,
        residual_connection=lem.connection, phi_alpha=phi.real, phi_alpha_alpha=phi_aa.real,
        first_norm=np.linalg.norm(dx, axis=-1), first_norm_t=np.linalg.norm(dxt, axis=-1),
        lambda_imag=lam_imag, degenerate=deg, tol=dict(tol or {}),
    )


def _identity_report(S, alpha, u) -> RibaucourReport:
    G, n = len(u), S.n
    z, zn = np.zeros(G), np.zeros((G, n))
    return RibaucourReport(alpha, u, zn, zn, z, z, z, z, z, z, z, zn, zn, 0.0,
                           np.ones(G, dtype=bool), identity=True)


def ribaucour_pair(S: SpectralCurveData, alpha: int, grid: Grid | None = None,
                   target: SpectralCurveData | None = None, n_points: int = 20, seed: int = 0,
                   tol: dict | None = None) -> RibaucourReport:
    """Certify that x (from S) and x_a (from the swapped data) form a Ribaucour pair.

    ``target`` defaults to ``swap_data(S, alpha)``; passing data equal to S
    short-circuits to an identity report.
    """
    St = swap_data(S, alpha) if target is None else target
    grid = grid or Grid.interval(S.n)
    u = grid.points()
    if St == S:
        return _identity_report(S, alpha, u)
    sol = solve_on_points(S, u, order=1)
    solt = solve_on_points(St, u, order=1)
    return pair_report(S, alpha, u, sol, solt, n_points, seed, tol)


# -- concircularity -----------------------------------------------------------


def circle_through(p0, p1, p2):
    """Center, radius and in-plane orthonormal basis of the circle through three points.

    Works on batches: inputs of shape (..., D).  Collinear triples give NaN.
    """
    a = p1 - p0
    b = p2 - p0
    aa = np.sum(a * a, -1)
    bb = np.sum(b * b, -1)
    ab = np.sum(a * b, -1)
    det = aa * bb - ab * ab
    with np.errstate(all="ignore"):
        s = 0.5 * bb * (aa - ab) / det
        t = 0.5 * aa * (bb - ab) / det
        center = p0 + s[..., None] * a + t[..., None] * b
        radius = np.linalg.norm(center - p0, axis=-1)
    return center, radius, det / np.maximum(aa * bb, 1e-300)


def concircularity_residuals(p0, p1, p2, p3):
    """Distance from p3 to the circle through p0, p1, p2, and that circle's radius."""
    p0, p1, p2, p3 = (np.asarray(p, dtype=float) for p in (p0, p1, p2, p3))
    center, radius, sin2 = circle_through(p0, p1, p2)
    a = p1 - p0
    b = p2 - p0
    with np.errstate(all="ignore"):
        e1 = a / np.linalg.norm(a, axis=-1, keepdims=True)
        b_perp = b - np.sum(b * e1, -1, keepdims=True) * e1
        e2 = b_perp / np.linalg.norm(b_perp, axis=-1, keepdims=True)
        w = p3 - center
        in_plane = np.sum(w * e1, -1)[..., None] * e1 + np.sum(w * e2, -1)[..., None] * e2
        off = np.linalg.norm(w - in_plane, axis=-1)
        radial = np.linalg.norm(in_plane, axis=-1) - radius
        return np.hypot(off, radial), radius, sin2


def concircularity_check(p, p_a, p_b, p_ab) -> float:
    """Distance of p_ab from the circle through p, p_a, p_b (0 iff concircular)."""
    dist, _, sin2 = concircularity_residuals(p, p_a, p_b, p_ab)
    if not sin2 > 1e-24:  # sin^2 of the angle at p; 1e-12 on the sine
        raise CollinearTriple("first three points are collinear")
    return float(dist)


# -- Bianchi cube -------------------------------------------------------------


@dataclass(frozen=True)
class CubeReport:
    l: int
    nets: dict[int, OrthogonalNet]  # keyed by subset bitmask
    edge_reports: dict[tuple[int, int], RibaucourReport]  # (subset, alpha)
    concircularity: dict[tuple[int, int, int], np.ndarray]  # (subset, a, b) -> relative residual
    path_independent: bool
    net_reports: dict[int, dict] = field(default_factory=dict)
    tol: float = CIRCLE_TOL

    @property
    def edges_ok(self) -> bool:
        return all(r.ok for r in self.edge_reports.values())

    def face_fraction(self, key) -> float:
        v = self.concircularity[key]
        return float(np.mean(np.isfinite(v) & (v < self.tol)))

    @property
    def faces_ok(self) -> bool:
        return all(self.face_fraction(k) >= 0.9 for k in self.concircularity)

    @property
    def ok(self) -> bool:
        nets_ok = all(r["orthogonality"]["ok"] and r["conjugacy"]["ok"] for r in self.net_reports.values())
        return self.edges_ok and self.faces_ok and self.path_independent and nets_ok

    def summary(self) -> dict:
        return {
            "l": self.l,
            "nets": len(self.nets),
            "edges": {f"{_subset(m)}+{a + 1}": r.summary() for (m, a), r in sorted(self.edge_reports.items())},
            "faces": {
                f"{_subset(m)}+{{{a + 1},{b + 1}}}": {
                    "max": float(np.nanmax(v)) if np.any(np.isfinite(v)) else None,
                    "fraction_ok": self.face_fraction((m, a, b)),
                }
                for (m, a, b), v in sorted(self.concircularity.items())
            },
            "net_reports": {_subset(m): r for m, r in sorted(self.net_reports.items())},
            "path_independent": self.path_independent,
            "ok": bool(self.ok),
        }


def _subset(mask: int) -> str:
    return "{" + ",".join(str(k + 1) for k in range(mask.bit_length()) if mask >> k & 1) + "}"


def subset_data(S: SpectralCurveData, mask: int) -> SpectralCurveData:
    return apply_swaps(S, [k for k in range(S.l) if mask >> k & 1])


def check_path_independence(S: SpectralCurveData, mask: int, max_orders: int = 24) -> bool:
    """Every order of applying the swaps in ``mask`` yields identical data."""
    members = [k for k in range(S.l) if mask >> k & 1]
    ref = apply_swaps(S, members)
    for count, order in enumerate(permutations(members)):
        if count >= max_orders:
            break
        if apply_swaps(S, order) != ref:
            return False
    return True


def bianchi_cube(S: SpectralCurveData, grid: Grid | None = None, n_points: int = 20, seed: int = 0,
                 tol: dict | None = None) -> CubeReport:
    """Build all 2^l nets, certify every edge and the concircularity of every 2-face."""
    grid = grid or Grid.interval(S.n)
    u = grid.points()
    l = S.l
    sols: dict[int, BASolution] = {}
    nets: dict[int, OrthogonalNet] = {}
    net_reports: dict[int, dict] = {}
    tol = dict(tol or {})
    for mask in range(1 << l):
        SA = subset_data(S, mask)
        sols[mask] = solve_on_points(SA, u, order=2)
        nets[mask] = net_from_solution(SA, grid, sols[mask], fd_check=0)
        net_reports[mask] = {
            "orthogonality": orthogonality_report(nets[mask], tol.get("orthogonality", 1e-8)).to_dict(),
            "conjugacy": conjugacy_report(nets[mask], tol.get("conjugacy", 1e-6)).to_dict(),
        }
    path_ok = all(check_path_independence(S, m) for m in range(1 << l))

    edges = {}
    for mask in range(1 << l):
        for a in range(l):
            if mask >> a & 1:
                continue
            edges[(mask, a)] = pair_report(subset_data(S, mask), a, u, sols[mask], sols[mask | 1 << a],
                                           n_points, seed, tol)

    faces = {}
    for mask in range(1 << l):
        for a, b in combinations(range(l), 2):
            if mask >> a & 1 or mask >> b & 1:
                continue
            dist, radius, _ = concircularity_residuals(nets[mask].points, nets[mask | 1 << a].points,
                                                       nets[mask | 1 << b].points,
                                                       nets[mask | 1 << a | 1 << b].points)
            with np.errstate(all="ignore"):
                faces[(mask, a, b)] = dist / radius
    return CubeReport(l, nets, edges, faces, path_ok, net_reports, tol.get("concircularity", CIRCLE_TOL))


# -- the l = 1 closed form ----------------------------------------------------


@dataclass(frozen=True)
class ClosedFormReport:
    c: float
    max_deviation: float
    c_fit_spread: float  # max |x_1 . x - c| / |c|
    norm_identity: float  # max relative gap in x_1.x_1 = c^2 / (x.x)
    degenerate: int

    def to_dict(self) -> dict:
        return {"c": self.c, "max_deviation": self.max_deviation, "c_fit_spread": self.c_fit_spread,
                "norm_identity": self.norm_identity, "degenerate": self.degenerate}


def closed_form_l1(S: SpectralCurveData, grid: Grid | None = None, d=None) -> ClosedFormReport:
    """Compare x_1 with the inversion c x / (x . x), c = -2 r_1."""
    if S.l != 1:
        raise PreconditionViolated(f"closed form needs l = 1, got l = {S.l}")
    d = np.asarray((1.0,) + (0.0,) * S.N if d is None else d, dtype=float)
    if d.shape != (1 + S.N,) or d[0] == 0.0 or np.any(d[1:] != 0.0):
        raise PreconditionViolated("closed form needs d = (d_1, 0, ..., 0) with d_1 != 0")
    grid = grid or Grid.interval(S.n)
    u = grid.points()
    S0 = S.with_d(d)
    sol = solve_on_points(S0, u, order=0)
    sol1 = solve_on_points(swap_data(S0, 0), u, order=0)
    x = np.stack([sol.value(q) for q in S.Q], -1).real
    x1 = np.stack([sol1.value(q) for q in S.Q], -1).real
    # with d_1 != 1 the normalization of psi_1 rescales x_1 by d_1^2
    c = float(-2.0 * omega_for(S).residues_r[0] * d[0] ** 2)
    xx = np.sum(x * x, -1)
    bad = sol.singular | sol1.singular | (xx < DELTA_MIN)
    good = ~bad
    with np.errstate(all="ignore"):
        dev = np.linalg.norm(x1 - c * x / xx[:, None], axis=-1) / np.linalg.norm(x1, axis=-1)
        spread = np.abs(np.sum(x1 * x, -1) - c) / abs(c)
        nid = np.abs(np.sum(x1 * x1, -1) - c * c / xx) / (c * c / xx)
    m = lambda v: float(np.max(v[good])) if np.any(good) else float("nan")  # noqa: E731
    return ClosedFormReport(c, m(dev), m(spread), m(nid), int(np.sum(bad)))
