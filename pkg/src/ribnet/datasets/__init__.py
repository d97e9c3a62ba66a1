"""Shipped datasets and the "dumbbell" family builder.

The dumbbell curve has one self-paired component per P_j (P_j at infinity,
Q_j at 0), one self-paired component per sigma-fixed R-point (Q at 0, R at
infinity), and a pair of components G+ and G- exchanged by sigma.  Every
self-paired component is glued to G+ at (a, b) and to G- at (-a, b).
Omega is prescribed by its residues; its zeros on G+ and G- (and on the
components carrying fixed R-points) are where gamma must go.
"""

from __future__ import annotations

from importlib import resources
from typing import Sequence

import numpy as np

from ..curve import INFINITY, Component, Node, PointOnCurve, SpectralCurveData, load, loads

SHIPPED = ("ds-n2-l1", "ds-n3-l2", "ds-n2-N1-l1")


def load_dataset(name: str) -> SpectralCurveData:
    """Load a shipped dataset by name (with or without ``.json``)."""
    stem = name[:-5] if name.endswith(".json") else name
    text = resources.files(__name__).joinpath(f"{stem}.json").read_text()
    return loads(text)


def dataset_path(name: str):
    stem = name[:-5] if name.endswith(".json") else name
    return resources.files(__name__).joinpath(f"{stem}.json")


def _partial_fraction_zeros(poles: Sequence[float], res: Sequence[float]) -> np.ndarray:
    P = np.polynomial.polynomial
    num = np.zeros(1)
    for k, (_, r) in enumerate(zip(poles, res)):
        term = np.array([r], dtype=float)
        for q in list(poles[:k]) + list(poles[k + 1:]):
            term = P.polymul(term, [-q, 1.0])
        num = P.polyadd(num, term)
    num = np.trim_zeros(num, "b")
    # the leading coefficient is the residue sum, which vanishes by construction
    while len(num) > 1 and abs(num[-1]) < 1e-13 * np.max(np.abs(num)):
        num = num[:-1]
    return P.polyroots(num)


def build_dumbbell(
    n: int,
    l: int,
    a: Sequence[float],
    b: Sequence[float],
    R: Sequence[float],
    r: Sequence[float] = (),
    *,
    N: int = 0,
    t: Sequence[float] = (),
    gamma_side: Sequence[int] | None = None,
    rho: Sequence[float] | None = None,
    d: Sequence[float] | None = None,
) -> SpectralCurveData:
    """Assemble dumbbell data with gamma placed at the zeros of Omega.

    a, b: node coordinates for each of the n+N self-paired components.
    R: coordinates of R_1..R_l on G+.
    r: residues of Omega at R_1..R_{l-1}; r_l follows from the residue sum.
    t: residue of Omega at the node branches of the k-th fixed-R component,
       in (-1/2, 0) so the zeros there are real.
    gamma_side: for each zero of Omega on G+, +1 puts gamma on G+, -1 on G-.
    """
    k = n + N
    if len(a) != k or len(b) != k or len(R) != l or len(r) not in (l - 1, l) or len(t) != N:
        raise ValueError("parameter lengths do not match n, N, l")
    plus, minus = k, k + 1
    comps = [Component(c, c, True) for c in range(k)]
    comps += [Component(plus, minus, False), Component(minus, plus, False)]
    nodes = []
    for c in range(k):
        nodes.append(Node(PointOnCurve(c, a[c]), PointOnCurve(plus, b[c])))
        nodes.append(Node(PointOnCurve(c, -a[c]), PointOnCurve(minus, b[c])))

    node_res = [0.5] * n + [-tk for tk in t]
    r = list(r[: l - 1])
    r.append(-sum(node_res) - sum(r))
    zeros = np.sort(_partial_fraction_zeros(list(b) + list(R), node_res + r).real)
    if len(zeros) != k + l - 2:
        raise ValueError("unexpected zero count on G+")
    side = list(gamma_side) if gamma_side is not None else [1] * len(zeros)
    gamma = [PointOnCurve(plus if s > 0 else minus, float(z)) for z, s in zip(zeros, side)]
    for m, tk in enumerate(t):
        gamma.append(PointOnCurve(n + m, float(a[n + m] / np.sqrt(1.0 + 2.0 * tk))))

    return SpectralCurveData(
        n=n,
        N=N,
        l=l,
        components=tuple(comps),
        nodes=tuple(nodes),
        P=tuple(PointOnCurve(j, INFINITY) for j in range(n)),
        rho=tuple(rho) if rho is not None else (1.0,) * n,
        Q=tuple(PointOnCurve(c, 0.0) for c in range(k)),
        R=tuple(PointOnCurve(plus, x) for x in R) + tuple(PointOnCurve(n + m, INFINITY) for m in range(N)),
        gamma=tuple(gamma),
        d=tuple(d) if d is not None else (1.0,) * (l + N),
    )


__all__ = ["SHIPPED", "build_dumbbell", "dataset_path", "load", "load_dataset"]
