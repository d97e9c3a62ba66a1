"""CSV / JSON / OBJ writers for sampled nets."""

from __future__ import annotations

import csv
import io
import json
from itertools import combinations

import numpy as np

from .errors import InvalidData
from .net import OrthogonalNet


def to_csv(net: OrthogonalNet) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow([f"u{i + 1}" for i in range(net.n)] + [f"x{k + 1}" for k in range(net.dim)] + ["flagged"])
    for u, x, f in zip(net.u, net.points, net.flags):
        w.writerow([repr(float(v)) for v in u] + [repr(float(v)) for v in x] + [int(f)])
    return buf.getvalue()


def to_json(net: OrthogonalNet) -> str:
    return json.dumps(net.to_dict())


def to_obj(net: OrthogonalNet) -> str:
    """Coordinate curves as polylines and coordinate surfaces as quad meshes.

    Surfaces are drawn for every pair of axes with the remaining parameters
    fixed at their middle grid index.  Only the first three coordinates are
    written; lower-dimensional nets are padded with zeros.  Flagged points
    break polylines and drop the quads that touch them.
    """
    if net.n > 3:
        raise InvalidData("OBJ export supports n <= 3")
    shape = net.grid.shape
    idx = np.arange(len(net.u)).reshape(shape)
    pts = np.zeros((len(net.u), 3))
    k = min(3, net.dim)
    pts[:, :k] = net.points[:, :k]
    bad = net.flags | ~np.all(np.isfinite(pts), axis=-1)
    lines = [f"# ribnet net {net.source_hash}", f"# grid {list(shape)}"]
    lines += [f"v {p[0]!r} {p[1]!r} {p[2]!r}" for p in pts.tolist()]

    for axis in range(net.n):
        lines.append(f"g curves_u{axis + 1}")
        moved = np.moveaxis(idx, axis, -1).reshape(-1, shape[axis])
        for row in moved:
            run = []
            for v in row:
                if bad[v]:
                    if len(run) > 1:
                        lines.append("l " + " ".join(str(t + 1) for t in run))
                    run = []
                else:
                    run.append(int(v))
            if len(run) > 1:
                lines.append("l " + " ".join(str(t + 1) for t in run))

    for a, b in combinations(range(net.n), 2):
        lines.append(f"g surface_u{a + 1}_u{b + 1}")
        sl = tuple(slice(None) if ax in (a, b) else shape[ax] // 2 for ax in range(net.n))
        face = idx[sl]
        for i in range(face.shape[0] - 1):
            for j in range(face.shape[1] - 1):
                quad = [face[i, j], face[i + 1, j], face[i + 1, j + 1], face[i, j + 1]]
                if not any(bad[q] for q in quad):
                    lines.append("f " + " ".join(str(int(q) + 1) for q in quad))
    return "\n".join(lines) + "\n"


WRITERS = {"csv": to_csv, "json": to_json, "obj": to_obj}


def export(net: OrthogonalNet, fmt: str) -> str:
    try:
        return WRITERS[fmt](net)
    except KeyError:
        raise InvalidData(f"unknown format {fmt!r}") from None
