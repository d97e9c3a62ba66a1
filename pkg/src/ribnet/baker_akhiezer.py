"""Baker-Akhiezer function on a nodal rational curve.

On component ``c`` the function is ``E_c(z, u) * r_c(z)`` where ``r_c`` is a
combination of ``1`` and ``1/(z - g)`` for each gamma point ``g`` on ``c``
(``z`` if ``g`` is at infinity), and ``E_c = exp(rho_j z u_j)`` when ``c``
carries ``P_j``, else 1.  Gluing at every node and the normalization at the
physical R-points give a square linear system ``A(u) w = b(d)``.

Everything here is batched over ``u``: a ``u`` array of shape ``(..., n)``
yields coefficients of shape ``(..., m)``.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .curve import INFINITY, PointOnCurve, SpectralCurveData, require_valid
from .errors import (
    DimensionMismatch,
    EvalAtEssentialSingularity,
    EvalAtPole,
    SingularSystem,
)

COND_LIMIT = 1e12


@dataclass(frozen=True)
class _Eval:
    """Linear functional ``w -> E(z,u) * basis . w[block]`` for one point."""

    block: slice
    basis: np.ndarray
    direction: int | None
    growth: complex


class BASystem:
    """Static structure of the linear system for a fixed dataset."""

    def __init__(self, S: SpectralCurveData):
        require_valid(S)
        self.S = S
        self.blocks: dict[int, slice] = {}
        self.gammas: dict[int, list[PointOnCurve]] = {}
        start = 0
        for c in S.components:
            gs = [g for g in S.gamma if g.component == c.id]
            self.gammas[c.id] = gs
            self.blocks[c.id] = slice(start, start + 1 + len(gs))
            start += 1 + len(gs)
        self.m = start
        self.p_on = {p.component: j for j, p in enumerate(S.P)}

        # rows: node gluing first, then one normalization row per R-point
        self.terms: list[tuple[int, float, _Eval]] = []
        for k, nd in enumerate(S.nodes):
            self.terms.append((k, 1.0, self.point_eval(nd.branch_a)))
            self.terms.append((k, -1.0, self.point_eval(nd.branch_b)))
        self.n_node_rows = len(S.nodes)
        for a in range(len(S.R)):
            self.terms.append((self.n_node_rows + a, 1.0, self.point_eval(S.physical_R(a))))
        n_rows = self.n_node_rows + len(S.R)
        if n_rows != self.m:
            raise DimensionMismatch(f"{n_rows} equations for {self.m} unknowns")

    def point_eval(self, p: PointOnCurve) -> _Eval:
        cid = p.component
        if cid not in self.blocks:
            raise EvalAtPole(f"unknown component {cid}")
        z = p.coordinate
        j = self.p_on.get(cid)
        if j is not None and z is INFINITY:
            raise EvalAtEssentialSingularity(f"{p} is P_{j + 1}")
        basis = [1.0]
        for g in self.gammas[cid]:
            if g.coordinate is INFINITY:
                if z is INFINITY:
                    raise EvalAtPole(f"{p} is a pole of psi")
                basis.append(z)
            elif z is INFINITY:
                basis.append(0.0)
            else:
                if z == g.coordinate:
                    raise EvalAtPole(f"{p} is a pole of psi")
                basis.append(1.0 / (z - g.coordinate))
        growth = 0.0 if j is None else self.S.rho[j] * z
        return _Eval(self.blocks[cid], np.array(basis, dtype=complex), j, complex(growth))

    # -- assembly ----------------------------------------------------------

    def _factor(self, ev: _Eval, u: np.ndarray, power: int = 0, dirs=()) -> np.ndarray:
        """exp(growth*u_j) * growth**power, zero unless every index in dirs is j."""
        if ev.direction is None:
            f = np.ones(u.shape[:-1], dtype=complex)
            return f if power == 0 else np.zeros_like(f)
        if any(i != ev.direction for i in dirs):
            return np.zeros(u.shape[:-1], dtype=complex)
        return np.exp(ev.growth * u[..., ev.direction]) * ev.growth**power

    def matrix(self, u: np.ndarray, dirs: tuple[int, ...] = ()) -> np.ndarray:
        """A(u), or its partial derivative along the directions in dirs."""
        u = np.asarray(u, dtype=float)
        A = np.zeros(u.shape[:-1] + (self.m, self.m), dtype=complex)
        for row, sign, ev in self.terms:
            f = self._factor(ev, u, len(dirs), dirs)
            A[..., row, ev.block] += sign * f[..., None] * ev.basis
        return A

    def rhs(self, d) -> np.ndarray:
        d = np.asarray(d, dtype=float)
        if d.shape != (self.m - self.n_node_rows,):
            raise DimensionMismatch(f"d has shape {d.shape}, expected ({self.m - self.n_node_rows},)")
        b = np.zeros(self.m, dtype=complex)
        b[self.n_node_rows:] = d
        return b


@lru_cache(maxsize=64)
def ba_system(S: SpectralCurveData) -> BASystem:
    return BASystem(S)


def assemble_system(S: SpectralCurveData, u, d=None) -> tuple[np.ndarray, np.ndarray]:
    sysm = ba_system(S)
    return sysm.matrix(np.asarray(u, dtype=float)), sysm.rhs(S.d if d is None else d)


@dataclass(frozen=True)
class BASolution:
    """psi(u, .) for a batch of parameter points u.

    ``coeffs`` has shape ``batch + (m,)``; ``dcoeffs[i]`` and ``d2coeffs[i, k]``
    hold the u-derivatives of the coefficients when requested.  Entries where
    the system was singular are NaN and marked in ``singular``.
    """

    system: BASystem
    u: np.ndarray
    d: np.ndarray
    coeffs: np.ndarray
    dcoeffs: np.ndarray | None
    d2coeffs: np.ndarray | None
    condition_number: np.ndarray
    singular: np.ndarray

    @property
    def S(self) -> SpectralCurveData:
        return self.system.S

    def _parts(self, p: PointOnCurve):
        ev = self.system.point_eval(p)
        return ev, self.system._factor(ev, self.u)

    def value(self, p: PointOnCurve) -> np.ndarray:
        ev, E = self._parts(p)
        return E * (self.coeffs[..., ev.block] @ ev.basis)

    def partial(self, p: PointOnCurve, i: int) -> np.ndarray:
        if self.dcoeffs is None:
            raise ValueError("solution was computed without derivatives")
        ev, E = self._parts(p)
        out = E * (self.dcoeffs[i][..., ev.block] @ ev.basis)
        if ev.direction == i:
            out = out + ev.growth * E * (self.coeffs[..., ev.block] @ ev.basis)
        return out

    def partial2(self, p: PointOnCurve, i: int, k: int) -> np.ndarray:
        if self.d2coeffs is None:
            raise ValueError("solution was computed without second derivatives")
        ev, E = self._parts(p)
        r = lambda w: w[..., ev.block] @ ev.basis  # noqa: E731
        out = E * r(self.d2coeffs[i, k])
        g = ev.growth
        if ev.direction == i:
            out = out + g * E * r(self.dcoeffs[k])
        if ev.direction == k:
            out = out + g * E * r(self.dcoeffs[i])
        if ev.direction == i == k:
            out = out + g * g * E * r(self.coeffs)
        return out

    def _xi(self, w: np.ndarray, j: int):
        cid = self.S.P[j].component
        blk = w[..., self.system.blocks[cid]]
        return blk[..., 0], self.S.rho[j] * np.sum(blk[..., 1:], axis=-1)

    def leading_coeffs(self, j: int):
        """(xi_0, xi_1) of the expansion at P_j in powers of 1/k_j."""
        return self._xi(self.coeffs, j)

    def xi0_partial(self, j: int, i: int) -> np.ndarray:
        return self._xi(self.dcoeffs[i], j)[0]


def solve_psi(S: SpectralCurveData, u, d=None, order: int = 0, strict: bool | None = None) -> BASolution:
    """Solve for psi at one u (shape (n,)) or a batch (shape (..., n)).

    ``order`` selects how many u-derivatives of the coefficients to compute.
    A single u with a singular system raises SingularSystem; batches flag the
    offending entries instead unless ``strict`` is set.
    """
    sysm = ba_system(S)
    u = np.asarray(u, dtype=float)
    if u.shape[-1] != S.n:
        raise DimensionMismatch(f"u has {u.shape[-1]} components, expected {S.n}")
    d = np.asarray(S.d if d is None else d, dtype=float)
    if d.shape != (len(S.R),):
        raise DimensionMismatch(f"d has shape {d.shape}, expected ({len(S.R)},)")
    if strict is None:
        strict = u.ndim == 1

    A = sysm.matrix(u)
    b = sysm.rhs(d)
    with np.errstate(all="ignore"):
        cond = np.linalg.cond(A)
    singular = ~np.isfinite(cond) | (cond > COND_LIMIT)
    if strict and np.any(singular):
        raise SingularSystem(f"Baker-Akhiezer system singular at u={u.tolist()} (cond={np.max(cond):.3e})")
    if np.any(singular):
        A = A.copy()
        A[singular] = np.eye(sysm.m)

    batch = u.shape[:-1]
    w = np.linalg.solve(A, np.broadcast_to(b[:, None], batch + (sysm.m, 1)))[..., 0]
    dw = d2w = None
    n = S.n
    if order >= 1:
        dA = [sysm.matrix(u, (i,)) for i in range(n)]
        rhs1 = np.stack([-(dA[i] @ w[..., None])[..., 0] for i in range(n)], axis=-1)
        dw_cols = np.linalg.solve(A, rhs1)
        dw = np.moveaxis(dw_cols, -1, 0)
    if order >= 2:
        cols, pairs = [], []
        for i in range(n):
            for k in range(i, n):
                t = sysm.matrix(u, (i, k)) @ w[..., None]
                t = t + dA[i] @ dw[k][..., None] + dA[k] @ dw[i][..., None]
                cols.append(-t[..., 0])
                pairs.append((i, k))
        sol2 = np.linalg.solve(A, np.stack(cols, axis=-1))
        d2w = np.empty((n, n) + batch + (sysm.m,), dtype=complex)
        for c, (i, k) in enumerate(pairs):
            d2w[i, k] = d2w[k, i] = sol2[..., c]

    if np.any(singular):
        w[singular] = np.nan
        if dw is not None:
            dw[:, singular] = np.nan
        if d2w is not None:
            d2w[:, :, singular] = np.nan
    return BASolution(sysm, u, d, w, dw, d2w, cond, singular)


def eval_psi(sol: BASolution, p: PointOnCurve):
    return sol.value(p)


def leading_coeffs(sol: BASolution, j: int):
    return sol.leading_coeffs(j)


@dataclass(frozen=True)
class BADerivative:
    """The u_i-derivative of psi, bound to one direction."""

    sol: BASolution
    i: int

    def eval(self, p: PointOnCurve):
        return self.sol.partial(p, self.i)

    def xi0(self, j: int):
        return self.sol.xi0_partial(j, self.i)

    @property
    def coeffs(self) -> np.ndarray:
        return self.sol.dcoeffs[self.i]


def partial_psi(S: SpectralCurveData, u, d=None, i: int = 0) -> BADerivative:
    if not 0 <= i < S.n:
        raise IndexError(f"direction {i} out of range for n={S.n}")
    return BADerivative(solve_psi(S, u, d, order=1), i)
