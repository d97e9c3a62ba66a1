"""Command-line entry point: ``ribnet <command> DATASET [options]``.

Exit codes: 0 all certifications passed, 1 certification failure,
2 invalid data, 3 I/O error.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .curve import SpectralCurveData, dataset_hash, load, validate_data
from .datasets import SHIPPED, load_dataset
from .errors import InvalidData, RibnetError
from .export import export
from .net import Grid, OrthogonalNet, conjugacy_report, orthogonality_report, reality_report, synth_net
from .omega import build_omega
from .ribaucour import bianchi_cube, ribaucour_pair
from .verify import DEFAULT_TOL, default_grid, verify_all

log = logging.getLogger("ribnet")


def _load(name: str) -> SpectralCurveData:
    path = Path(name)
    if path.exists():
        return load(path)
    stem = name[:-5] if name.endswith(".json") else name
    if stem in SHIPPED:
        return load_dataset(stem)
    raise FileNotFoundError(name)


def _tolerances(items) -> dict:
    tol = {}
    for item in items or []:
        key, sep, val = item.partition("=")
        if not sep or key not in DEFAULT_TOL:
            raise InvalidData(f"bad --tol {item!r}; keys: {', '.join(DEFAULT_TOL)}")
        tol[key] = float(val)
    return tol


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if np.isfinite(v) else None
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def _emit(report: dict, output: str | None) -> None:
    text = json.dumps(_jsonable(report), indent=2, sort_keys=True)
    if output:
        Path(output).write_text(text + "\n")
    else:
        print(text)


def _envelope(cmd: str, S: SpectralCurveData | None, args, results: dict, ok: bool) -> dict:
    return {
        "tool": "ribnet",
        "version": __version__,
        "command": cmd,
        "dataset_hash": dataset_hash(S) if S is not None else None,
        "seed": args.seed,
        "results": results,
        "ok": bool(ok),
    }


def _grid(args, S) -> Grid:
    return Grid.parse(args.grid, S.n) if args.grid else default_grid(S)


def cmd_validate(args) -> int:
    S = _load(args.dataset)
    rep = validate_data(S)
    _emit(_envelope("validate", S, args, rep.to_dict(), rep.ok), args.output)
    return 0 if rep.ok else 2


def cmd_omega(args) -> int:
    S = _load(args.dataset)
    tol = _tolerances(args.tol)
    om = build_omega(S, tol=tol.get("omega", DEFAULT_TOL["omega"]))
    _emit(_envelope("omega", S, args, om.to_dict(), True), args.output)
    return 0


def cmd_synth(args) -> int:
    S = _load(args.dataset)
    tol = dict(DEFAULT_TOL, **_tolerances(args.tol))
    build_omega(S, tol=tol["omega"])
    net = synth_net(S, _grid(args, S), seed=args.seed)
    orth = orthogonality_report(net, tol["orthogonality"])
    conj = conjugacy_report(net, tol["conjugacy"])
    real = reality_report(net, tol["reality"])
    ok = orth.ok and conj.ok and real["ok"]
    results = {"orthogonality": orth.to_dict(), "conjugacy": conj.to_dict(), "reality": real,
               "flagged_fraction": net.flagged_fraction, "fd_second_error": net.fd_second_error}
    if args.output:
        Path(args.output).write_text(export(net, args.format or "json"))
        results["written"] = args.output
    _emit(_envelope("synth", S, args, results, ok), None)
    return 0 if ok else 1


def cmd_transform(args) -> int:
    S = _load(args.dataset)
    tol = dict(DEFAULT_TOL, **_tolerances(args.tol))
    rep = ribaucour_pair(S, args.alpha - 1, _grid(args, S), seed=args.seed,
                         tol={"ribtrans": tol["ribtrans"], "lam": tol["lam"], "lemma": tol["lemma"]})
    _emit(_envelope("transform", S, args, rep.summary(), rep.ok), args.output)
    return 0 if rep.ok else 1


def cmd_cube(args) -> int:
    S = _load(args.dataset)
    tol = dict(DEFAULT_TOL, **_tolerances(args.tol))
    cube = bianchi_cube(S, _grid(args, S), seed=args.seed, tol=tol)
    _emit(_envelope("cube", S, args, cube.summary(), cube.ok), args.output)
    return 0 if cube.ok else 1


def cmd_verify(args) -> int:
    S = _load(args.dataset)
    res = verify_all(S, _grid(args, S) if args.grid else None, args.seed, _tolerances(args.tol))
    _emit(_envelope("verify", S, args, res, res["ok"]), args.output)
    return 0 if res["ok"] else 1


def cmd_export(args) -> int:
    try:
        net = OrthogonalNet.from_dict(json.loads(Path(args.dataset).read_text()))
    except (json.JSONDecodeError, KeyError, ValueError) as exc:
        raise InvalidData(f"not a net JSON file: {exc}") from exc
    text = export(net, args.format or "csv")
    if args.output:
        Path(args.output).write_text(text)
    else:
        sys.stdout.write(text)
    return 0


COMMANDS = {
    "validate": cmd_validate,
    "omega": cmd_omega,
    "synth": cmd_synth,
    "transform": cmd_transform,
    "cube": cmd_cube,
    "verify": cmd_verify,
    "export": cmd_export,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ribnet", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"ribnet {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("dataset", help="dataset JSON path or shipped name (net JSON for export)")
        p.add_argument("--grid", help="a,b,count for every axis, or a,b,count;a,b,count;... per axis")
        p.add_argument("--tol", action="append", metavar="KEY=VAL", help="override a tolerance")
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--output", help="output path (report, or exported net for synth/export)")
        p.add_argument("--format", choices=("csv", "json", "obj"))
        if name == "transform":
            p.add_argument("--alpha", type=int, required=True, help="1-based index of the R-point to swap")
        p.add_argument("-v", "--verbose", action="store_true")
    return parser


def _glue_grid(argv: list[str]) -> list[str]:
    """Turn ``--grid -1,1,33`` into ``--grid=-1,1,33`` so argparse does not read it as a flag."""
    out: list[str] = []
    it = iter(argv)
    for tok in it:
        if tok == "--grid":
            nxt = next(it, None)
            out.append(tok if nxt is None else f"--grid={nxt}")
        else:
            out.append(tok)
    return out


def main(argv=None) -> int:
    args = build_parser().parse_args(_glue_grid(list(sys.argv[1:] if argv is None else argv)))
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        return COMMANDS[args.command](args)
    except InvalidData as exc:
        log.error("invalid data: %s", exc)
        return 2
    except OSError as exc:
        log.error("I/O error: %s", exc)
        return 3
    except RibnetError as exc:
        log.error("%s: %s", type(exc).__name__, exc)
        return 1


if __name__ == "__main__":
    sys.exit(main())
