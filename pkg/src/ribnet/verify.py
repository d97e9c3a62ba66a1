"""The full certification suite run by ``ribnet verify``."""

from __future__ import annotations

import numpy as np

from .baker_akhiezer import solve_psi
from .curve import SpectralCurveData, random_points, validate_data
from .errors import OmegaNotFound
from .net import Grid, conjugacy_report, orthogonality_report, reality_report, synth_net
from .omega import build_omega
from .ribaucour import bianchi_cube, closed_form_l1, lemma_identities

DEFAULT_TOL = {
    "omega": 1e-10,
    "omega_sum": 1e-12,
    "orthogonality": 1e-8,
    "conjugacy": 1e-6,
    "reality": 1e-10,
    "ribtrans": 1e-8,
    "lam": 1e-8,
    "lemma": 1e-8,
    "concircularity": 1e-6,
    "closed_form": 1e-10,
    "gradient": 1e-6,
    "linearity": 1e-12,
    "zero": 1e-14,
    "flagged": 0.1,
}


def default_grid(S: SpectralCurveData) -> Grid:
    return Grid.interval(S.n, count=33 if S.n <= 2 else 17)


def gradient_oracle(S: SpectralCurveData, samples: int = 50, seed: int = 0, h: float = 1e-5) -> dict:
    """Analytic u-derivatives of psi against central differences at random (u, Q)."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    pts = random_points(S, rng, samples)
    done = 0
    while done < samples:
        u = rng.uniform(-1.0, 1.0, S.n)
        sol = solve_psi(S, u, order=1, strict=False)
        if sol.singular:
            continue
        p = pts[done]
        an = np.array([sol.partial(p, i) for i in range(S.n)])
        fd = np.empty(S.n, dtype=complex)
        for i in range(S.n):
            e = np.zeros(S.n)
            e[i] = h
            fd[i] = (solve_psi(S, u + e).value(p) - solve_psi(S, u - e).value(p)) / (2 * h)
        # gradient-vector norm: single components may vanish identically
        worst = max(worst, float(np.linalg.norm(an - fd) / max(np.linalg.norm(an), np.linalg.norm(fd), 1e-300)))
        done += 1
    return {"samples": samples, "max_rel_error": worst}


def linearity_check(S: SpectralCurveData, seed: int = 0, trials: int = 5) -> dict:
    """d = 0 gives psi = 0, and the solve is linear in d."""
    rng = np.random.default_rng(seed)
    m = len(S.R)
    zero_norm = 0.0
    lin = 0.0
    for _ in range(trials):
        u = rng.uniform(-1.0, 1.0, S.n)
        zero_norm = max(zero_norm, float(np.linalg.norm(solve_psi(S, u, np.zeros(m)).coeffs)))
        d1, d2 = rng.normal(size=m), rng.normal(size=m)
        a, b = rng.normal(size=2)
        w = solve_psi(S, u, a * d1 + b * d2).coeffs
        w12 = a * solve_psi(S, u, d1).coeffs + b * solve_psi(S, u, d2).coeffs
        lin = max(lin, float(np.linalg.norm(w - w12) / np.linalg.norm(w)))
    return {"zero_norm": zero_norm, "linearity": lin}


def verify_all(S: SpectralCurveData, grid: Grid | None = None, seed: int = 0, tol: dict | None = None) -> dict:
    """Run every certification; returns a JSON-ready dict with an ``ok`` flag per check."""
    t = dict(DEFAULT_TOL)
    t.update(tol or {})
    grid = grid or default_grid(S)
    out: dict = {}

    rep = validate_data(S)
    out["validate"] = rep.to_dict()
    if not rep.ok:
        out["ok"] = False
        return out

    try:
        om = build_omega(S, tol=t["omega"])
        out["omega"] = {"residues_r": list(om.residues_r), "nullity": om.nullity, "checks": om.checks, "ok": True}
    except OmegaNotFound as exc:
        out["omega"] = {"ok": False, "error": str(exc)}
        out["ok"] = False
        return out

    net = synth_net(S, grid, seed=seed)
    orth = orthogonality_report(net, t["orthogonality"])
    conj = conjugacy_report(net, t["conjugacy"])
    real = reality_report(net, t["reality"])
    out["net"] = {
        "grid": grid.to_dict(),
        "flagged_fraction": net.flagged_fraction,
        "fd_second_error": net.fd_second_error,
        "orthogonality": orth.to_dict(),
        "conjugacy": conj.to_dict(),
        "reality": real,
        "ok": bool(orth.ok and conj.ok and real["ok"] and net.flagged_fraction <= t["flagged"]),
    }

    cube = bianchi_cube(S, grid, seed=seed, tol={"ribtrans": t["ribtrans"], "lam": t["lam"], "lemma": t["lemma"],
                                                 "concircularity": t["concircularity"],
                                                 "orthogonality": t["orthogonality"],
                                                 "conjugacy": t["conjugacy"]})
    out["cube"] = cube.summary()

    rng = np.random.default_rng(seed)
    lemmas = {}
    lem_ok = True
    for a in range(S.l):
        u = rng.uniform(-1.0, 1.0, (10, S.n))
        res = lemma_identities(S, a, u, n_points=20, seed=seed).max()
        res["ok"] = all(res[k] < t["lemma"] for k in ("connection", "scalar_up", "scalar_down"))
        lem_ok &= res["ok"]
        lemmas[str(a + 1)] = res
    out["lemmas"] = dict(lemmas, ok=lem_ok)

    grad = gradient_oracle(S, 50, seed)
    grad["ok"] = grad["max_rel_error"] < t["gradient"]
    out["gradient"] = grad

    lin = linearity_check(S, seed)
    lin["ok"] = lin["zero_norm"] < t["zero"] and lin["linearity"] < t["linearity"]
    out["linearity"] = lin

    if S.l == 1:
        cf = closed_form_l1(S, grid).to_dict()
        cf["ok"] = cf["max_deviation"] < t["closed_form"]
        out["closed_form"] = cf

    out["ok"] = all(v.get("ok", True) for v in out.values() if isinstance(v, dict))
    return out
