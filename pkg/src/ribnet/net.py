"""Orthogonal nets x(u) = (psi(u, Q_1), ..., psi(u, Q_{n+N})) and their certificates."""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from itertools import combinations

import numpy as np

from .baker_akhiezer import BASolution, solve_psi
from .curve import SpectralCurveData, dataset_hash
from .errors import InvalidData, SingularSystem

ORTHO_TOL = 1e-8
CONJ_TOL = 1e-6
REAL_TOL = 1e-10
MAX_FLAGGED = 0.1
CHUNK = 2048


@dataclass(frozen=True)
class Grid:
    """Axis-aligned lattice; each axis is (start, step, count)."""

    axes: tuple[tuple[float, float, int], ...]

    @classmethod
    def interval(cls, n: int, a: float = -1.0, b: float = 1.0, count: int = 33) -> "Grid":
        step = (b - a) / (count - 1) if count > 1 else 0.0
        return cls(tuple((float(a), float(step), int(count)) for _ in range(n)))

    @classmethod
    def parse(cls, text: str, n: int) -> "Grid":
        """``"a,b,count"`` for every axis, or ``;``-separated per axis."""
        parts = [p for p in text.split(";") if p.strip()]
        if len(parts) == 1:
            parts = parts * n
        if len(parts) != n:
            raise InvalidData(f"grid spec has {len(parts)} axes, dataset has n={n}")
        axes = []
        for p in parts:
            try:
                a, b, c = p.split(",")
                a, b, c = float(a), float(b), int(c)
            except ValueError as exc:
                raise InvalidData(f"bad grid axis {p!r}") from exc
            if c < 1:
                raise InvalidData(f"bad grid count {c}")
            axes.append((a, (b - a) / (c - 1) if c > 1 else 0.0, c))
        return cls(tuple(axes))

    @property
    def n(self) -> int:
        return len(self.axes)

    @property
    def shape(self) -> tuple[int, ...]:
        return tuple(c for _, _, c in self.axes)

    @property
    def step(self) -> tuple[float, ...]:
        return tuple(s for _, s, _ in self.axes)

    def axis_values(self, k: int) -> np.ndarray:
        a, s, c = self.axes[k]
        return a + s * np.arange(c)

    def points(self) -> np.ndarray:
        mesh = np.meshgrid(*[self.axis_values(k) for k in range(self.n)], indexing="ij")
        return np.stack([m.ravel() for m in mesh], axis=-1)

    def refined(self) -> "Grid":
        return Grid(tuple((a, s / 2, 2 * c - 1) for a, s, c in self.axes))

    def to_dict(self) -> dict:
        return {"axes": [list(ax) for ax in self.axes]}


@dataclass(frozen=True)
class OrthogonalNet:
    grid: Grid
    u: np.ndarray  # (G, n)
    points: np.ndarray  # (G, D)
    first: np.ndarray  # (G, n, D)
    second: np.ndarray  # (G, len(pairs), D), mixed partials i<j
    pairs: tuple[tuple[int, int], ...]
    flags: np.ndarray  # (G,) True where the system was singular
    imag_max: float
    fd_second_error: float = float("nan")
    source_hash: str = ""
    meta: dict = field(default_factory=dict)

    @property
    def n(self) -> int:
        return self.u.shape[-1]

    @property
    def dim(self) -> int:
        return self.points.shape[-1]

    @property
    def flagged_fraction(self) -> float:
        return float(np.mean(self.flags)) if self.flags.size else 0.0

    def transformed(self, M: np.ndarray) -> "OrthogonalNet":
        """Apply a linear map to every output vector."""
        return OrthogonalNet(self.grid, self.u, self.points @ M.T, self.first @ M.T, self.second @ M.T,
                             self.pairs, self.flags, self.imag_max, self.fd_second_error, self.source_hash)

    def to_dict(self) -> dict:
        return {
            "grid": self.grid.to_dict(),
            "source_hash": self.source_hash,
            "pairs": [list(p) for p in self.pairs],
            "u": self.u.tolist(),
            "points": self.points.tolist(),
            "first": self.first.tolist(),
            "second": self.second.tolist(),
            "flags": self.flags.astype(bool).tolist(),
            "imag_max": self.imag_max,
        }

    @classmethod
    def from_dict(cls, obj: dict) -> "OrthogonalNet":
        n = len(obj["grid"]["axes"])
        grid = Grid(tuple((float(a), float(s), int(c)) for a, s, c in obj["grid"]["axes"]))
        u = np.asarray(obj["u"], dtype=float).reshape(-1, n)
        points = np.asarray(obj["points"], dtype=float)
        pairs = tuple(tuple(p) for p in obj["pairs"])
        second = np.asarray(obj["second"], dtype=float).reshape(len(u), len(pairs), points.shape[-1])
        return cls(grid, u, points, np.asarray(obj["first"], dtype=float), second, pairs,
                   np.asarray(obj["flags"], dtype=bool), float(obj.get("imag_max", 0.0)),
                   source_hash=obj.get("source_hash", ""))


def _threads() -> int:
    try:
        return max(1, int(os.environ.get("RIBNET_THREADS", "1")))
    except ValueError:
        return 1


def solve_on_points(S: SpectralCurveData, u: np.ndarray, d=None, order: int = 2) -> BASolution:
    """Batched solve, split into chunks and optionally threaded."""
    chunks = [u[k:k + CHUNK] for k in range(0, len(u), CHUNK)]
    if len(chunks) == 1:
        return solve_psi(S, u, d, order=order, strict=False)
    nthreads = min(_threads(), len(chunks))
    if nthreads > 1:
        with ThreadPoolExecutor(nthreads) as ex:
            parts = list(ex.map(lambda c: solve_psi(S, c, d, order=order, strict=False), chunks))
    else:
        parts = [solve_psi(S, c, d, order=order, strict=False) for c in chunks]
    cat = lambda name, axis: (None if getattr(parts[0], name) is None  # noqa: E731
                              else np.concatenate([getattr(p, name) for p in parts], axis=axis))
    return BASolution(parts[0].system, u, parts[0].d, cat("coeffs", 0), cat("dcoeffs", 1),
                      cat("d2coeffs", 2), cat("condition_number", 0), cat("singular", 0))


def net_from_solution(S: SpectralCurveData, grid: Grid, sol: BASolution, fd_check: int = 5,
                      seed: int = 0, d=None) -> OrthogonalNet:
    n = S.n
    pairs = tuple(combinations(range(n), 2))
    x = np.stack([sol.value(q) for q in S.Q], axis=-1)
    first = np.stack([np.stack([sol.partial(q, i) for q in S.Q], axis=-1) for i in range(n)], axis=1)
    if sol.d2coeffs is not None and pairs:
        second = np.stack(
            [np.stack([sol.partial2(q, i, j) for q in S.Q], axis=-1) for i, j in pairs], axis=1)
    else:
        second = np.zeros((len(x), len(pairs), len(S.Q)), dtype=complex)
    flags = sol.singular | ~np.all(np.isfinite(x), axis=-1)
    good = ~flags
    imag = 0.0
    if np.any(good):
        imag = float(max(np.max(np.abs(x.imag[good])), np.max(np.abs(first.imag[good]))))
    net = OrthogonalNet(grid, sol.u, x.real, first.real, second.real, pairs, flags, imag,
                        source_hash=dataset_hash(S))
    if fd_check and pairs and sol.d2coeffs is not None:
        err = _fd_second_check(S, net, fd_check, seed, d)
        object.__setattr__(net, "fd_second_error", err)
    return net


def synth_net(S: SpectralCurveData, grid: Grid | None = None, d=None, fd_check: int = 5,
              seed: int = 0) -> OrthogonalNet:
    """Sample the net with analytic first and mixed second derivatives.

    Grid points where the linear system is singular are flagged; more than
    10% flagged raises SingularSystem.
    """
    grid = grid or Grid.interval(S.n)
    if grid.n != S.n:
        raise InvalidData(f"grid has {grid.n} axes, dataset has n={S.n}")
    sol = solve_on_points(S, grid.points(), d, order=2)
    net = net_from_solution(S, grid, sol, fd_check, seed, d)
    if net.flagged_fraction > MAX_FLAGGED:
        raise SingularSystem(f"{net.flagged_fraction:.1%} of grid points are degenerate")
    return net


def _fd_second_check(S, net: OrthogonalNet, count: int, seed: int, d, h: float = 1e-5) -> float:
    """Max relative gap between analytic mixed partials and central differences of first partials."""
    rng = np.random.default_rng(seed)
    good = np.flatnonzero(~net.flags)
    if not len(good):
        return float("nan")
    idx = rng.choice(good, size=min(count, len(good)), replace=False)
    worst = 0.0
    for g in idx:
        for p, (i, j) in enumerate(net.pairs):
            e = np.zeros(S.n)
            e[j] = h
            up = solve_psi(S, net.u[g] + e, d, order=1)
            dn = solve_psi(S, net.u[g] - e, d, order=1)
            fd = np.array([(up.partial(q, i) - dn.partial(q, i)).real / (2 * h) for q in S.Q])
            an = net.second[g, p]
            # the mixed partial may vanish identically; |d_i x||d_j x|/|x| sets the scale
            scale = np.linalg.norm(an) + (np.linalg.norm(net.first[g, i]) * np.linalg.norm(net.first[g, j])
                                          / max(np.linalg.norm(net.points[g]), 1e-300))
            worst = max(worst, float(np.linalg.norm(fd - an) / max(scale, 1e-300)))
    return worst


# -- reports ----------------------------------------------------------------


@dataclass(frozen=True)
class ResidualStats:
    max: float
    mean: float
    argmax_u: tuple[float, ...]
    count: int
    flagged: int
    tol: float
    values: np.ndarray = field(repr=False, default=None)

    @property
    def ok(self) -> bool:
        if self.count == 0:
            return self.flagged == 0
        return self.max < self.tol

    def to_dict(self) -> dict:
        return {"max": self.max, "mean": self.mean, "argmax_u": list(self.argmax_u), "count": self.count,
                "flagged": self.flagged, "tol": self.tol, "ok": bool(self.ok)}


def stats(values: np.ndarray, flags: np.ndarray, u: np.ndarray, tol: float) -> ResidualStats:
    good = ~flags
    if values.size == 0 or not np.any(good):
        return ResidualStats(0.0, 0.0, (), 0, int(np.sum(flags)), tol, values)
    v = np.where(good, values, -np.inf)
    k = int(np.argmax(v))
    return ResidualStats(float(v[k]), float(np.mean(values[good])), tuple(float(t) for t in u[k]),
                         int(np.sum(good)), int(np.sum(flags)), tol, values)


def orthogonality_residuals(net: OrthogonalNet) -> np.ndarray:
    """Per point: max over i<j of |d_i x . d_j x| / (|d_i x| |d_j x|)."""
    if not net.pairs:
        return np.zeros(len(net.u))
    norms = np.linalg.norm(net.first, axis=-1)
    out = np.zeros(len(net.u))
    for i, j in net.pairs:
        dot = np.abs(np.sum(net.first[:, i] * net.first[:, j], axis=-1))
        with np.errstate(all="ignore"):
            out = np.maximum(out, dot / (norms[:, i] * norms[:, j]))
    return out


def orthogonality_report(net: OrthogonalNet, tol: float = ORTHO_TOL) -> ResidualStats:
    vals = orthogonality_residuals(net) if net.pairs else np.zeros(0)
    return stats(vals, net.flags, net.u, tol)


@dataclass(frozen=True)
class ConjugacyReport:
    stats: ResidualStats
    coefficients: np.ndarray  # (G, pairs, 2): fitted c^i_ij, c^j_ij
    residuals: np.ndarray  # (G, pairs)

    @property
    def empty(self) -> bool:
        return self.residuals.shape[-1] == 0

    @property
    def ok(self) -> bool:
        return self.empty or self.stats.ok

    def to_dict(self) -> dict:
        return dict(self.stats.to_dict(), empty=self.empty, ok=bool(self.ok))


def conjugacy_report(net: OrthogonalNet, tol: float = CONJ_TOL) -> ConjugacyReport:
    """Least-squares fit of each mixed partial against span{d_i x, d_j x}."""
    G = len(net.u)
    P = len(net.pairs)
    coeffs = np.zeros((G, P, 2))
    res = np.zeros((G, P))
    if P == 0:
        return ConjugacyReport(stats(np.zeros(0), net.flags, net.u, tol), coeffs, res)
    for p, (i, j) in enumerate(net.pairs):
        B = np.stack([net.first[:, i], net.first[:, j]], axis=-1)  # (G, D, 2)
        y = net.second[:, p]
        good = ~net.flags
        c = np.zeros((G, 2))
        if np.any(good):
            c[good] = _lstsq2(B[good], y[good])
        r = y - np.einsum("gdk,gk->gd", B, c)
        with np.errstate(all="ignore"):
            res[:, p] = np.linalg.norm(r, axis=-1) / np.linalg.norm(y, axis=-1)
        res[~np.isfinite(res[:, p]), p] = 0.0
        coeffs[:, p] = c
    per_point = np.max(res, axis=-1)
    return ConjugacyReport(stats(per_point, net.flags, net.u, tol), coeffs, res)


def _lstsq2(B: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Batched least squares via QR of (G, D, 2) matrices."""
    q, r = np.linalg.qr(B)
    rhs = np.einsum("gdk,gd->gk", q, y)
    return np.linalg.solve(r, rhs[..., None])[..., 0]


def reality_report(net: OrthogonalNet, tol: float = REAL_TOL) -> dict:
    return {"imag_max": net.imag_max, "tol": tol, "ok": bool(net.imag_max < tol)}
