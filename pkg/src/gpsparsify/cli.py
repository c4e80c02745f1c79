"""Command-line front end.

Every command prints ``key=value`` lines (always including ``seed``), or a
single JSON object with ``--json``.  Exit status: 0 success, 1 failed check,
2 invalid input.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import os
import sys
import warnings

import numpy as np

from . import bench, io
from .core import Polytope, is_symmetric, symmetrize
from .mc import McConfig, estimate_gaussian_distance, estimate_width
from .norm import sparsify_norm
from .polytope import LiftConfig, sparsify_polytope
from .sparsify import AUX_CAP, SparseSup, center, sparsify
from .verify import (CheckReport, check_multiplicative, check_polytope, check_sparsifier,
                     run_suite)

EXIT_OK, EXIT_FAIL, EXIT_INVALID = 0, 1, 2
SEED_ENV = "GPSPARSIFY_SEED"


class InvalidInput(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise InvalidInput(f"{self.prog}: {message}")


def _common(p: argparse.ArgumentParser, eps: float | None = 0.2) -> None:
    p.add_argument("--samples", type=int, default=100_000, help="Monte Carlo samples per estimate")
    p.add_argument("--seed", type=int, default=None, help=f"root seed (default ${SEED_ENV} or 0)")
    p.add_argument("--workers", type=int, default=1, help="threads for sample blocks")
    p.add_argument("--json", action="store_true", help="emit one JSON object")
    if eps is not None:
        p.add_argument("--eps", type=float, default=eps)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="gpsparsify", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("width", help="estimate the Gaussian width of a vector set")
    _common(p, eps=None)
    p.add_argument("--input", required=True)

    p = sub.add_parser("sparsify", help="sparsify the supremum over a vector set")
    _common(p)
    p.add_argument("--input", required=True)
    p.add_argument("--c-mm", type=float, default=None,
                   help="majorizing-measure constant guess; reports the stage bound only")
    p.add_argument("--out")

    p = sub.add_parser("center", help="replace shifts by auxiliary Gaussian coordinates")
    _common(p)
    p.add_argument("--input", required=True, help="SparseSup file")
    p.add_argument("--a-cap", type=int, default=AUX_CAP)
    p.add_argument("--kappa", type=float, default=1.0)
    p.add_argument("--out")

    p = sub.add_parser("norm", help="junta approximation of the norm with the given dual set")
    _common(p, eps=0.25)
    p.add_argument("--input", required=True)
    p.add_argument("--a-cap", type=int, default=AUX_CAP)
    p.add_argument("--kappa", type=float, default=1.0)
    p.add_argument("--symmetrize", action="store_true")
    p.add_argument("--out", help="writes the junta directions as a VectorSet")

    p = sub.add_parser("polytope", help="approximate an intersection of halfspaces")
    _common(p, eps=0.3)
    p.add_argument("--input", required=True)
    p.add_argument("--m-cap", type=int, default=4096)
    p.add_argument("--tau", type=float, default=1.0)
    p.add_argument("--y-candidates", type=int, default=16)
    p.add_argument("--out")

    p = sub.add_parser("check", help="run the verification suite")
    _common(p, eps=None)
    p.add_argument("--suite", choices=["all", "quick"], default="all")
    p.add_argument("--c-sandwich", type=float, default=30.0)
    p.add_argument("--a-cap", type=int, default=AUX_CAP)
    p.add_argument("--kappa", type=float, default=1.0)
    p.add_argument("--m-cap", type=int, default=4096)
    p.add_argument("--tau", type=float, default=1.0)

    p = sub.add_parser("bench", help="gap examples and the disk sweep")
    _common(p, eps=0.05)
    p.add_argument("--case", choices=["coordinate", "polytope", "disk"], required=True)
    p.add_argument("--n", type=int, default=4096)
    p.add_argument("--subset-frac", type=float, default=0.5,
                   help="keep the first round(n^(1-c)) elements")
    p.add_argument("--sides", type=int, nargs="+", default=[8, 12, 16, 24, 32],
                   help="polygon sizes for the disk sweep")
    p.add_argument("--csv", help="write sweep rows to this CSV file ('-' for stdout)")
    return parser


def _seed(args) -> int:
    if args.seed is not None:
        return args.seed
    env = os.environ.get(SEED_ENV)
    if env is None:
        return 0
    try:
        return int(env)
    except ValueError:
        raise InvalidInput(f"{SEED_ENV}={env!r} is not an integer") from None


def _fmt(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(v)
    return str(v)


def _emit(fields: dict, as_json: bool, out=None) -> None:
    out = out or sys.stdout
    if as_json:
        out.write(json.dumps(fields, separators=(",", ":")) + "\n")
        return
    for k, v in fields.items():
        if isinstance(v, (list, dict)):
            v = json.dumps(v, separators=(",", ":"))
        out.write(f"{k}={_fmt(v)}\n")


def _load(path, kind):
    try:
        obj = {"vectorset": io.load_vectorset, "sparsesup": io.load_sparsesup,
               "polytope": io.load_polytope}[kind](path)
    except (OSError, KeyError, TypeError, ValueError) as exc:
        raise InvalidInput(f"{path}: {exc}") from None
    return obj


def _report_fields(rep: CheckReport) -> dict:
    return {"check": rep.name, "bound": rep.bound, "measured": rep.measured,
            "std_err": rep.std_err, "pass": rep.passed}


def cmd_width(args, cfg):
    T = _load(args.input, "vectorset")
    est = estimate_width(T, cfg)
    return {"size": len(T), "dim": T.dim, "width": est.mean, "std_err": est.std_err,
            "n_samples": est.n_samples}, EXIT_OK


def cmd_sparsify(args, cfg):
    T = _load(args.input, "vectorset")
    S = sparsify(T, args.eps, cfg.derive("build"), c_mm=args.c_mm)
    rep = check_sparsifier(T, S, args.eps, cfg.derive("check"))
    if args.out:
        io.store(S, args.out)
    fields = {"input_size": len(T), "support_size": len(S), "width_used": S.width_used}
    if "stages" in S.info:
        fields["last_stage"] = max(S.info["stages"])
    if "stage_bound" in S.info:
        fields["stage_bound"] = S.info["stage_bound"]
    return {**fields, **_report_fields(rep)}, EXIT_OK if rep.passed else EXIT_FAIL


def cmd_center(args, cfg):
    S = _load(args.input, "sparsesup")
    C = center(S, args.eps, args.a_cap, kappa=args.kappa)
    if args.out:
        io.store(C, args.out)
    return {"support_size": len(S), "centered_size": len(C), "dim": C.dim,
            "aux_dim": C.dim - S.dim}, EXIT_OK


def cmd_norm(args, cfg):
    T = _load(args.input, "vectorset")
    psi = sparsify_norm(T, args.eps, cfg.derive("build"), args.a_cap,
                        symmetrize=args.symmetrize, kappa=args.kappa)
    dual = T if is_symmetric(T) else symmetrize(T)
    rep = check_multiplicative(dual, psi, args.eps, cfg.derive("check"))
    if args.out:
        io.store(psi.directions, args.out)
    return {"input_size": len(T), "directions": len(psi.directions), "pad": psi.ambient_pad,
            "additive_gap": psi.info["additive_gap"], **_report_fields(rep)}, \
        EXIT_OK if rep.passed else EXIT_FAIL


def cmd_polytope(args, cfg):
    K = _load(args.input, "polytope")
    lc = LiftConfig(M_cap=args.m_cap, tau=args.tau, y_candidates=args.y_candidates)
    L = sparsify_polytope(K, args.eps, cfg.derive("build"), lc)
    rep = check_polytope(K, L, args.eps, cfg.derive("check"))
    if args.out:
        io.store(L, args.out)
    fields = {"input_halfspaces": len(K), "output_halfspaces": len(L), "kind": L.kind,
              "path": L.info.get("path", "uniform")}
    if "Q" in L.info:
        fields.update(Q=float(L.info["Q"]), Q_required=float(L.info["Q_required"]),
                      capped=bool(L.info["capped"]))
    return {**fields, **_report_fields(rep)}, EXIT_OK if rep.passed else EXIT_FAIL


def cmd_check(args, cfg):
    lc = LiftConfig(M_cap=args.m_cap, tau=args.tau)
    reports = run_suite(cfg, args.suite, args.c_sandwich, args.a_cap, args.kappa, lc)
    ok = all(r.passed for r in reports)
    if args.json:
        return {"suite": args.suite, "reports": [r.to_dict() for r in reports],
                "passed": sum(r.passed for r in reports), "total": len(reports),
                "pass": ok}, EXIT_OK if ok else EXIT_FAIL
    fields = {}
    for r in reports:
        fields[f"check[{r.name}]"] = (f"{'pass' if r.passed else 'fail'} measured={r.measured!r}"
                                      f" bound={r.bound!r} std_err={r.std_err!r}")
    fields.update(passed=sum(r.passed for r in reports), total=len(reports), all_pass=ok)
    return fields, EXIT_OK if ok else EXIT_FAIL


def _write_csv(path, header, rows):
    fh = sys.stdout if path == "-" else open(path, "w", newline="")
    try:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)
    finally:
        if fh is not sys.stdout:
            fh.close()


def cmd_bench(args, cfg):
    if args.case in ("coordinate", "polytope"):
        if args.n < 2 or not 0 < args.subset_frac < 1:
            raise InvalidInput("need n >= 2 and 0 < subset-frac < 1")
        m = bench.first_m(args.n, args.subset_frac)
        if args.case == "coordinate":
            T = bench.gen_coordinate_example(args.n)
            kept = SparseSup(T.subset(np.arange(m)), np.zeros(m), 1.0, np.arange(m))
            rep = check_sparsifier(T, kept, args.eps, cfg)
            oracle = 1.0 - bench.a_n(m) / bench.a_n(args.n)
        else:
            K = bench.gen_shifted_polytope(args.n)
            kept = Polytope(K.dim, K.normals[:m], K.offsets[:m])
            rep = check_polytope(K, kept, args.eps, cfg)
            oracle = None
        fields = {"case": args.case, "n": args.n, "kept": m, **_report_fields(rep)}
        if oracle is not None:
            fields["oracle_gap"] = oracle
        if args.csv:
            _write_csv(args.csv, ["case", "n", "kept", "measured", "std_err"],
                       [[args.case, args.n, m, rep.measured, rep.std_err]])
        return fields, EXIT_OK if rep.passed else EXIT_FAIL

    # disk: a circumscribed 1024-gon stands in for the disk; nested, so the
    # distance to each inscribed polygon has an exact quadrature value
    fine = bench.gen_regular_polygon(1024, 1.0)
    fine_measure = bench.polygon_measure(1024, 1.0)
    rows, ok, prev = [], True, math.inf
    for m in args.sides:
        if m < 3:
            raise InvalidInput("polygons need at least 3 sides")
        P = bench.inscribed_polygon(m)
        est = estimate_gaussian_distance(fine, P, cfg.derive(f"disk{m}"))
        oracle = fine_measure - bench.polygon_measure(m, math.cos(math.pi / m))
        match = abs(est.mean - oracle) <= 3.0 * est.std_err
        ok = ok and match and est.mean < prev
        prev = est.mean
        rows.append([m, est.mean, est.std_err, oracle, match])
    if args.csv:
        _write_csv(args.csv, ["sides", "measured", "std_err", "oracle", "match"], rows)
    fields = {"case": "disk", "sides": [r[0] for r in rows], "measured": [r[1] for r in rows],
              "std_err": [r[2] for r in rows], "oracle": [r[3] for r in rows],
              "pass": ok}
    return fields, EXIT_OK if ok else EXIT_FAIL


COMMANDS = {"width": cmd_width, "sparsify": cmd_sparsify, "center": cmd_center,
            "norm": cmd_norm, "polytope": cmd_polytope, "check": cmd_check,
            "bench": cmd_bench}


def run(argv: list[str] | None = None) -> int:
    try:
        args = build_parser().parse_args(argv)
        seed = _seed(args)
        cfg = McConfig(n_samples=args.samples, seed=seed, workers=args.workers)
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always")
            fields, code = COMMANDS[args.command](args, cfg)
    except InvalidInput as exc:
        print(exc, file=sys.stderr)
        return EXIT_INVALID
    except SystemExit as exc:  # --help
        return int(exc.code or 0)
    except (ValueError, OSError) as exc:
        print(f"gpsparsify: error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    for w in caught:
        print(f"warning: {w.message}", file=sys.stderr)
    _emit({"command": args.command, "seed": seed, **fields}, args.json)
    return code


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
