"""Algebraic-geometric data on a nodal curve with rational components.

Every component is a copy of the Riemann sphere with an affine coordinate
``z``.  The holomorphic involution ``sigma`` either preserves a component
(acting as ``z -> -z``) or swaps it with a partner component (acting as
``z -> z`` or ``z -> -z`` in the partner's chart).  Antiholomorphic
``tau`` is complex conjugation of coordinates, which is why all admissible
data is real.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Iterable, Sequence

from .errors import InvalidData

FORMAT_VERSION = 1


class _Infinity:
    """The point at infinity of an affine chart."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "INFINITY"

    def __reduce__(self):
        return (_Infinity, ())

    def __neg__(self):
        return self


INFINITY = _Infinity()


def is_infinite(z) -> bool:
    return z is INFINITY


@dataclass(frozen=True)
class PointOnCurve:
    component: int
    coordinate: complex | _Infinity

    def __post_init__(self):
        if self.coordinate is not INFINITY:
            z = complex(self.coordinate)
            if math.isnan(z.real) or math.isnan(z.imag) or math.isinf(abs(z)):
                raise InvalidData(f"bad coordinate {self.coordinate!r}")
            object.__setattr__(self, "coordinate", z)

    @property
    def at_infinity(self) -> bool:
        return self.coordinate is INFINITY

    def __repr__(self):
        return f"Point({self.component}, {self.coordinate!r})"


@dataclass(frozen=True)
class Component:
    id: int
    sigma_partner: int
    sigma_is_negation: bool = True

    @property
    def self_paired(self) -> bool:
        return self.sigma_partner == self.id


@dataclass(frozen=True)
class Node:
    branch_a: PointOnCurve
    branch_b: PointOnCurve

    def as_set(self) -> frozenset:
        return frozenset((self.branch_a, self.branch_b))


@dataclass(frozen=True)
class SpectralCurveData:
    """Full data S plus the value vector d and the per-point swap flags.

    ``R[:l]`` are the sigma-movable normalization points, ``R[l:]`` the
    sigma-fixed ones.  ``swap_state[a]`` selects whether the condition
    ``psi(u, .) = d[a]`` is imposed at ``R[a]`` or at ``sigma(R[a])``.
    """

    n: int
    N: int
    l: int
    components: tuple[Component, ...]
    nodes: tuple[Node, ...]
    P: tuple[PointOnCurve, ...]
    rho: tuple[float, ...]
    Q: tuple[PointOnCurve, ...]
    R: tuple[PointOnCurve, ...]
    gamma: tuple[PointOnCurve, ...]
    d: tuple[float, ...]
    swap_state: tuple[bool, ...] = field(default=())

    def __post_init__(self):
        for name in ("components", "nodes", "P", "rho", "Q", "R", "gamma", "d", "swap_state"):
            object.__setattr__(self, name, tuple(getattr(self, name)))
        if not self.swap_state:
            object.__setattr__(self, "swap_state", (False,) * self.l)
        object.__setattr__(self, "rho", tuple(float(r) for r in self.rho))
        object.__setattr__(self, "d", tuple(float(x) for x in self.d))
        object.__setattr__(self, "swap_state", tuple(bool(s) for s in self.swap_state))

    # -- convenience -------------------------------------------------------

    def component(self, cid: int) -> Component:
        for c in self.components:
            if c.id == cid:
                return c
        raise InvalidData(f"unknown component id {cid}")

    def physical_R(self, alpha: int) -> PointOnCurve:
        """Point where the condition psi = d[alpha] is imposed."""
        if alpha < self.l and self.swap_state[alpha]:
            return sigma_image(self, self.R[alpha])
        return self.R[alpha]

    def with_d(self, d: Sequence[float]) -> "SpectralCurveData":
        return replace(self, d=tuple(float(x) for x in d))

    def p_component(self, j: int) -> int:
        return self.P[j].component


def sigma_image(S: SpectralCurveData, p: PointOnCurve) -> PointOnCurve:
    comp = S.component(p.component)
    z = p.coordinate
    if z is not INFINITY and comp.sigma_is_negation:
        z = -z + 0.0  # avoid a signed zero
    return PointOnCurve(comp.sigma_partner, z)


def is_sigma_fixed(S: SpectralCurveData, p: PointOnCurve) -> bool:
    return sigma_image(S, p) == p


def arithmetic_genus(S: SpectralCurveData) -> int:
    return len(S.nodes) - len(S.components) + 1


def dual_graph_connected(S: SpectralCurveData) -> bool:
    ids = [c.id for c in S.components]
    if not ids:
        return False
    parent = {i: i for i in ids}

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for node in S.nodes:
        a, b = node.branch_a.component, node.branch_b.component
        if a in parent and b in parent:
            parent[find(a)] = find(b)
    return len({find(i) for i in ids}) == 1


def marked_points(S: SpectralCurveData) -> dict[str, list[PointOnCurve]]:
    """Named groups of all special points (sigma images of movable R and gamma included)."""
    return {
        "P": list(S.P),
        "Q": list(S.Q),
        "R": list(S.R),
        "sigmaR": [sigma_image(S, r) for r in S.R[: S.l]],
        "gamma": list(S.gamma),
        "sigma_gamma": [sigma_image(S, g) for g in S.gamma],
        "node": [b for nd in S.nodes for b in (nd.branch_a, nd.branch_b)],
    }


# -- validation -------------------------------------------------------------


@dataclass(frozen=True)
class Violation:
    code: str
    message: str


@dataclass(frozen=True)
class ValidationReport:
    violations: tuple[Violation, ...]

    @property
    def ok(self) -> bool:
        return not self.violations

    @property
    def codes(self) -> list[str]:
        return [v.code for v in self.violations]

    def to_dict(self) -> dict:
        return {"ok": self.ok, "violations": [{"code": v.code, "message": v.message} for v in self.violations]}


def validate_data(S: SpectralCurveData) -> ValidationReport:
    """Check every structural invariant of S; never raises."""
    out: list[Violation] = []

    def bad(code, msg):
        out.append(Violation(code, msg))

    ids = [c.id for c in S.components]
    idset = set(ids)
    if len(idset) != len(ids):
        bad("component-duplicate", "component ids are not unique")
    if S.n < 1 or S.N < 0 or S.l < 1:
        bad("counts", f"need n>=1, N>=0, l>=1, got n={S.n}, N={S.N}, l={S.l}")

    comps = {c.id: c for c in S.components}
    sigma_ok = True
    for c in S.components:
        partner = comps.get(c.sigma_partner)
        if partner is None:
            bad("component-unknown", f"component {c.id} pairs with missing {c.sigma_partner}")
            sigma_ok = False
        elif partner.sigma_partner != c.id or partner.sigma_is_negation != c.sigma_is_negation:
            bad("sigma-not-involution", f"sigma pairing of component {c.id} is not an involution")
            sigma_ok = False
        elif c.self_paired and not c.sigma_is_negation:
            bad("sigma-identity", f"sigma acts trivially on component {c.id}")
            sigma_ok = False

    groups = marked_points(S) if sigma_ok and _points_known(S, idset) else None
    if not _points_known(S, idset):
        bad("component-unknown", "a point refers to a missing component")

    if len(S.P) != S.n or len(S.rho) != S.n:
        bad("P-count", f"need {S.n} points P with scales, got {len(S.P)}/{len(S.rho)}")
    if len(S.Q) != S.n + S.N:
        bad("Q-count", f"need {S.n + S.N} points Q, got {len(S.Q)}")
    if len(S.R) != S.l + S.N:
        bad("R-count", f"need {S.l + S.N} points R, got {len(S.R)}")
    if len(S.d) != S.l + S.N:
        bad("d-count", f"need {S.l + S.N} values d, got {len(S.d)}")
    if len(S.swap_state) != S.l:
        bad("swap-count", f"need {S.l} swap flags, got {len(S.swap_state)}")
    if any(r == 0.0 or not math.isfinite(r) for r in S.rho):
        bad("rho-zero", "every local-parameter scale must be finite and nonzero")
    if any(not math.isfinite(x) for x in S.d):
        bad("d-nonfinite", "d must be finite")

    g = arithmetic_genus(S)
    if g < 0:
        bad("genus-negative", f"arithmetic genus {g} < 0")
    if not dual_graph_connected(S):
        bad("disconnected", "dual graph of the curve is not connected")
    if len(S.gamma) != g + S.l + S.N - 1:
        bad("gamma-degree", f"#gamma = {len(S.gamma)} but g+l+N-1 = {g + S.l + S.N - 1}")

    all_pts = [p for grp in (S.P, S.Q, S.R, S.gamma) for p in grp]
    all_pts += [b for nd in S.nodes for b in (nd.branch_a, nd.branch_b)]
    if any(p.coordinate is not INFINITY and p.coordinate.imag != 0.0 for p in all_pts):
        bad("non-real", "all coordinates must be real (tau is complex conjugation)")

    for k, nd in enumerate(S.nodes):
        if nd.branch_a == nd.branch_b:
            bad("node-degenerate", f"node {k} glues a point to itself")

    if groups is None:
        return ValidationReport(tuple(out))

    for j, p in enumerate(S.P):
        if not p.at_infinity or not comps[p.component].self_paired:
            bad("P-not-at-infinity", f"P_{j + 1} must sit at infinity of a self-paired component")
    if len({p.component for p in S.P}) != len(S.P):
        bad("P-shared-component", "at most one P per component")

    for a in range(min(S.l, len(S.R))):
        if is_sigma_fixed(S, S.R[a]):
            bad("R-not-movable", f"R_{a + 1} is sigma-fixed but must be movable")
    for a in range(S.l, len(S.R)):
        if not is_sigma_fixed(S, S.R[a]):
            bad("R-not-fixed", f"R_{a + 1} must be sigma-fixed")

    # sigma-fixed points of the curve: 0 and infinity of each self-paired component
    fixed = {PointOnCurve(c.id, z) for c in S.components if c.self_paired for z in (0j, INFINITY)}
    expected = list(S.P) + list(S.Q) + list(S.R[S.l:])
    if len(set(expected)) != len(expected) or set(expected) != fixed:
        bad("fixed-points", f"sigma-fixed points must be exactly P, Q, R_l+1..R_l+N ({2 * (S.n + S.N)} points)")

    special = []
    for name in ("P", "Q", "R", "sigmaR", "gamma", "sigma_gamma", "node"):
        special += [(name, p) for p in groups[name]]
    # includes gamma vs sigma(gamma): a repeated zero of Omega is not modeled
    seen: dict[PointOnCurve, str] = {}
    for name, p in special:
        if p in seen:
            bad("point-collision", f"{name} point {p} coincides with a {seen[p]} point")
        seen.setdefault(p, name)

    node_sets = {nd.as_set() for nd in S.nodes}
    for nd in S.nodes:
        img = frozenset((sigma_image(S, nd.branch_a), sigma_image(S, nd.branch_b)))
        if img not in node_sets:
            bad("nodes-not-sigma-invariant", f"sigma image of node {nd} is not a node")
            break

    return ValidationReport(tuple(out))


def _points_known(S: SpectralCurveData, idset: set) -> bool:
    pts = [p for grp in (S.P, S.Q, S.R, S.gamma) for p in grp]
    pts += [b for nd in S.nodes for b in (nd.branch_a, nd.branch_b)]
    return all(p.component in idset for p in pts)


def require_valid(S: SpectralCurveData) -> None:
    rep = validate_data(S)
    if not rep.ok:
        raise InvalidData("; ".join(f"{v.code}: {v.message}" for v in rep.violations))


# -- serialization ----------------------------------------------------------


def _coord_to_json(z):
    if z is INFINITY:
        return "inf"
    return [z.real, z.imag]


def _coord_from_json(v):
    if v == "inf":
        return INFINITY
    if isinstance(v, (int, float)):
        return complex(v)
    if isinstance(v, list) and len(v) == 2:
        return complex(float(v[0]), float(v[1]))
    raise InvalidData(f"bad coordinate encoding {v!r}")


def _point_to_json(p: PointOnCurve) -> dict:
    return {"component": p.component, "coordinate": _coord_to_json(p.coordinate)}


def _point_from_json(obj) -> PointOnCurve:
    try:
        return PointOnCurve(int(obj["component"]), _coord_from_json(obj["coordinate"]))
    except (KeyError, TypeError) as exc:
        raise InvalidData(f"bad point {obj!r}") from exc


def to_json_dict(S: SpectralCurveData) -> dict:
    return {
        "format": FORMAT_VERSION,
        "n": S.n,
        "N": S.N,
        "l": S.l,
        "components": [
            {"id": c.id, "sigma_partner": c.sigma_partner, "sigma_is_negation": c.sigma_is_negation}
            for c in S.components
        ],
        "nodes": [[_point_to_json(nd.branch_a), _point_to_json(nd.branch_b)] for nd in S.nodes],
        "P": [dict(_point_to_json(p), rho=r) for p, r in zip(S.P, S.rho)],
        "Q": [_point_to_json(p) for p in S.Q],
        "R": [_point_to_json(p) for p in S.R],
        "gamma": [_point_to_json(p) for p in S.gamma],
        "d": list(S.d),
        "swap_state": list(S.swap_state),
    }


def from_json_dict(obj) -> SpectralCurveData:
    try:
        if obj.get("format") != FORMAT_VERSION:
            raise InvalidData(f"unsupported dataset format {obj.get('format')!r}")
        return SpectralCurveData(
            n=int(obj["n"]),
            N=int(obj["N"]),
            l=int(obj["l"]),
            components=tuple(
                Component(int(c["id"]), int(c["sigma_partner"]), bool(c.get("sigma_is_negation", True)))
                for c in obj["components"]
            ),
            nodes=tuple(Node(_point_from_json(a), _point_from_json(b)) for a, b in obj["nodes"]),
            P=tuple(_point_from_json(p) for p in obj["P"]),
            rho=tuple(float(p["rho"]) for p in obj["P"]),
            Q=tuple(_point_from_json(p) for p in obj["Q"]),
            R=tuple(_point_from_json(p) for p in obj["R"]),
            gamma=tuple(_point_from_json(p) for p in obj["gamma"]),
            d=tuple(float(x) for x in obj["d"]),
            swap_state=tuple(bool(s) for s in obj.get("swap_state", [])),
        )
    except InvalidData:
        raise
    except (KeyError, TypeError, ValueError, AttributeError) as exc:
        raise InvalidData(f"malformed dataset: {exc!r}") from exc


def dumps(S: SpectralCurveData) -> str:
    return json.dumps(to_json_dict(S), indent=1, sort_keys=True)


def loads(text: str) -> SpectralCurveData:
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InvalidData(f"not valid JSON: {exc}") from exc
    return from_json_dict(obj)


def load(path: str | Path) -> SpectralCurveData:
    return loads(Path(path).read_text())


def dump(S: SpectralCurveData, path: str | Path) -> None:
    Path(path).write_text(dumps(S) + "\n")


def dataset_hash(S: SpectralCurveData) -> str:
    canon = json.dumps(to_json_dict(S), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canon.encode()).hexdigest()


def random_points(S: SpectralCurveData, rng, count: int, complex_points: bool = True,
                  margin: float = 0.15, span: float = 3.0) -> list[PointOnCurve]:
    """Random regular points, away from every special point and node branch."""
    special = [p for grp in marked_points(S).values() for p in grp]
    out: list[PointOnCurve] = []
    cids = [c.id for c in S.components]
    while len(out) < count:
        cid = cids[rng.integers(len(cids))]
        z = complex(rng.uniform(-span, span), rng.uniform(-span, span) if complex_points else 0.0)
        if all(p.component != cid or p.at_infinity or abs(p.coordinate - z) > margin for p in special):
            out.append(PointOnCurve(cid, z))
    return out


def points_on(S: SpectralCurveData, cid: int, pts: Iterable[PointOnCurve]) -> list[PointOnCurve]:
    return [p for p in pts if p.component == cid]
