"""Search dumbbell parameters and write the shipped datasets.

Run from the repository root:  python tools/author_datasets.py
Each candidate must pass build_omega; among those, the one whose
Baker-Akhiezer systems (for every swap state) have the smallest worst-case
condition number on a coarse grid over [-1, 1]^n is kept.
"""

import sys

import numpy as np

from ribnet.curve import dump
from ribnet.datasets import build_dumbbell, dataset_path
from ribnet.errors import RibnetError
from ribnet.net import Grid
from ribnet.omega import build_omega
from ribnet.ribaucour import apply_swaps
from ribnet.baker_akhiezer import solve_psi


def score(S, count=7):
    u = Grid.interval(S.n, count=count).points()
    worst = 0.0
    for mask in range(1 << S.l):
        SA = apply_swaps(S, [k for k in range(S.l) if mask >> k & 1])
        sol = solve_psi(SA, u, strict=False)
        if np.any(sol.singular):
            return np.inf
        worst = max(worst, float(np.max(sol.condition_number)))
    return worst


def candidates(rng, n, l, N, trials, sides=None):
    for _ in range(trials):
        k = n + N
        a = np.round(rng.uniform(0.4, 1.0, k), 3)
        b = np.round(np.sort(rng.uniform(0.2, 2.0, k)), 3)
        R = np.round(np.sort(rng.uniform(b[-1] + 0.4, b[-1] + 2.5, l)), 3)
        total = -(n / 2.0)
        t = np.round(rng.uniform(-0.4, -0.1, N), 3)
        total += float(np.sum(t))
        r = list(np.round(rng.uniform(0.2, 0.8, l - 1) * total / l, 3))
        side = sides if sides is not None else [int(s) for s in rng.choice([-1, 1], k + l - 2)]
        yield dict(n=n, l=l, N=N, a=[float(v) for v in a], b=[float(v) for v in b], R=[float(v) for v in R],
                   r=[float(v) for v in r], t=[float(v) for v in t], gamma_side=side)


def author(name, n, l, N=0, trials=200, seed=0, sides=None):
    rng = np.random.default_rng(seed)
    best, best_score = None, np.inf
    for params in candidates(rng, n, l, N, trials, sides):
        try:
            S = build_dumbbell(**params)
            build_omega(S)
        except (RibnetError, ValueError):
            continue
        sc = score(S)
        if sc < best_score:
            best, best_score = (S, params), sc
    if best is None:
        sys.exit(f"{name}: no admissible candidate")
    S, params = best
    dump(S, dataset_path(name))
    print(f"{name}: worst cond {best_score:.3g}, r = {build_omega(S).residues_r}, params = {params}")


if __name__ == "__main__":
    # gamma on G+ makes the base net the nontrivial one of the pair
    author("ds-n2-l1", 2, 1, sides=[1])
    # two of the three gamma points on G+: only the doubly swapped net is separable
    author("ds-n3-l2", 3, 2, sides=[1, -1, 1])
    author("ds-n2-N1-l1", 2, 1, N=1)
