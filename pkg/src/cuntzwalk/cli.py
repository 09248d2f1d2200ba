"""Command line interface.

Exit codes: 0 success, 1 verification failure, 2 malformed input,
3 mismatch between two independent computations of the same quantity.
Output is deterministic (sorted JSON keys, fixed orderings) so runs diff
cleanly.  The environment variable CUNTZ_WALK_THREADS caps the BLAS thread
pool when threadpoolctl is available.
"""

from __future__ import annotations

import argparse
import contextlib
import csv
import io
import json
import os
import sys
from fractions import Fraction

import numpy as np

from . import (
    build_coisometry,
    build_dilation,
    check_assumptions,
    classify_balanced,
    cyclicity_rank,
    export_min_set_walk,
    find_min_sets,
    fixed_point_oracle,
    fixtures,
    frame_frequencies,
    intertwiner_basis,
    irreducibility_verdict,
    load_walk,
    minimal_invariant_sets,
    mu_hat,
    product_graph,
    save_walk,
    span_residual,
    validate_walk,
    verify_cuntz,
    verify_parseval,
)
from .coisometry import InvalidWalkError
from .intertwiners import ORACLE_SIZE_LIMIT
from .spectral import SpectralSystem
from .walks import WalkInputError

EXIT_OK = 0
EXIT_VERIFY = 1
EXIT_INPUT = 2
EXIT_MISMATCH = 3


class _Failure(Exception):
    def __init__(self, code: int, message: str):
        super().__init__(message)
        self.code = code


def _limit_threads():
    raw = os.environ.get("CUNTZ_WALK_THREADS")
    if not raw:
        return contextlib.nullcontext()
    try:
        n = max(1, int(raw))
    except ValueError:
        raise _Failure(EXIT_INPUT, f"CUNTZ_WALK_THREADS={raw!r} is not an integer")
    try:
        from threadpoolctl import threadpool_limits
    except ImportError:
        return contextlib.nullcontext()
    return threadpool_limits(limits=n)


def _read_walk(path: str):
    try:
        with open(path, "rb") as fh:
            return load_walk(fh.read())
    except OSError as e:
        raise _Failure(EXIT_INPUT, f"cannot read {path}: {e}")
    except WalkInputError as e:
        raise _Failure(EXIT_INPUT, f"{path}: {e}")


def _read_system(path: str) -> SpectralSystem:
    try:
        with open(path, "rb") as fh:
            doc = json.loads(fh.read())
        return SpectralSystem.from_dict(doc)
    except OSError as e:
        raise _Failure(EXIT_INPUT, f"cannot read {path}: {e}")
    except (ValueError, KeyError, TypeError) as e:
        raise _Failure(EXIT_INPUT, f"{path}: malformed spectral system: {e}")


def _emit(doc: dict, args) -> None:
    if args.format == "json":
        text = json.dumps(doc, indent=2, sort_keys=True)
    else:
        lines = []

        def walk(prefix, val):
            if isinstance(val, dict):
                for k in sorted(val):
                    walk(f"{prefix}{k}.", val[k])
            elif isinstance(val, list):
                lines.append(f"{prefix[:-1]} = {val}")
            else:
                lines.append(f"{prefix[:-1]} = {val}")

        walk("", doc)
        text = "\n".join(lines)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text + "\n")
    else:
        print(text)


def _write_text(path: str, text: str) -> None:
    try:
        with open(path, "w", newline="") as fh:
            fh.write(text)
    except OSError as e:
        raise _Failure(EXIT_INPUT, f"cannot write {path}: {e}")


# -- commands ------------------------------------------------------------

def cmd_analyze(args) -> int:
    w = _read_walk(args.walk)
    report = validate_walk(w, args.tol)
    doc = {"validation": report.to_dict()}
    if report.ok:
        doc["coisometry_defect"] = build_coisometry(w).defect()
        doc["irreducibility"] = irreducibility_verdict(w)
        pg = product_graph(w, w)
        msets = classify_balanced(pg, minimal_invariant_sets(pg))
        from .products import first_passage
        reps = msets.representatives
        worst_mass = max(first_passage(pg, reps, p, args.nmax)[args.nmax]
                         for p in pg.nodes)
        doc["self_product"] = {
            "minimal_sets": len(msets.sets),
            "balanced_sets": len(msets.balanced_sets),
            "commutant_dimension": len(msets.balanced_sets),
            "representatives": [list(p) for p in msets.representatives],
            "max_first_passage_mass_at_nmax": float(worst_mass),
        }
    _emit(doc, args)
    return EXIT_OK if report.ok else EXIT_VERIFY


def cmd_dilate(args) -> int:
    w = _read_walk(args.walk)
    try:
        space, ops = build_dilation(w, args.depth)
    except (InvalidWalkError, ValueError) as e:
        raise _Failure(EXIT_INPUT, str(e))
    report = verify_cuntz(ops, args.tol)
    rank = cyclicity_rank(ops)
    doc = {
        "depth": args.depth,
        "dimension": space.dim(space.depth),
        "cuntz": report.to_dict(),
        "cyclicity_rank": rank,
        "cyclic": rank == space.dim(space.depth),
    }
    if args.out:
        # sparse triplets (label, row, col, re, im) plus a sidecar basis map
        buf = io.StringIO()
        wr = csv.writer(buf)
        wr.writerow(["label", "row", "col", "re", "im"])
        for lam in w.labels:
            coo = ops.S[lam].tocoo()
            order = np.lexsort((coo.col, coo.row))
            for k in order:
                v = coo.data[k]
                wr.writerow([lam, int(coo.row[k]), int(coo.col[k]),
                             repr(float(v.real)), repr(float(v.imag))])
        _write_text(args.out, buf.getvalue())
        sidecar = {
            "basis": [{"vertex": v, "word": list(wd)} for v, wd in space.basis],
            "level_dims": list(space.level_dims),
        }
        _write_text(args.out + ".index.json", json.dumps(sidecar, indent=2, sort_keys=True) + "\n")
        args_out, args.out = args.out, None
        _emit(doc, args)
        args.out = args_out
    else:
        _emit(doc, args)
    return EXIT_OK if report.ok(args.tol) else EXIT_VERIFY


def _intertwine_doc(w, w2, tol):
    space = intertwiner_basis(w, w2)
    doc = {
        "dimension": space.dimension,
        "minimal_sets": len(space.report.sets),
        "balanced_sets": [m.to_dict() for m in space.report.balanced_sets],
        "unbalanced_witnesses": [m.witness for m in space.report.sets
                                 if m.balanced is False and m.witness],
        "basis": [
            [[{"re": float(z.real), "im": float(z.imag)} for z in row] for row in T]
            for T in space.basis
        ],
    }
    code = EXIT_OK
    if w.n_vertices * w2.n_vertices <= ORACLE_SIZE_LIMIT:
        dim, mats = fixed_point_oracle(w, w2)
        resid = span_residual(space.basis, mats)
        doc["oracle"] = {"dimension": dim, "span_residual": resid}
        if dim != space.dimension or resid > 1e-8:
            code = EXIT_MISMATCH
    return doc, code


def cmd_intertwine(args) -> int:
    w = _read_walk(args.walk)
    w2 = _read_walk(args.walk2)
    try:
        doc, code = _intertwine_doc(w, w2, args.tol)
    except ValueError as e:
        raise _Failure(EXIT_INPUT, str(e))
    _emit(doc, args)
    return code


def cmd_commutant(args) -> int:
    w = _read_walk(args.walk)
    try:
        doc, code = _intertwine_doc(w, w, args.tol)
    except ValueError as e:
        raise _Failure(EXIT_INPUT, str(e))
    doc["irreducible"] = doc["dimension"] == 1
    _emit(doc, args)
    return code


def cmd_spectral_check(args) -> int:
    sys_ = _read_system(args.system)
    report = check_assumptions(sys_, args.tol)
    _emit(report.to_dict(), args)
    return EXIT_OK if report.passed(args.tol) else EXIT_VERIFY


def _min_sets(args):
    sys_ = _read_system(args.system)
    try:
        return sys_, find_min_sets(sys_)
    except ValueError as e:
        raise _Failure(EXIT_VERIFY, str(e))


def cmd_spectral_minsets(args) -> int:
    _sys, msets = _min_sets(args)
    _emit({"min_sets": [m.to_dict() for m in msets]}, args)
    return EXIT_OK


def cmd_spectral_walk(args) -> int:
    sys_, msets = _min_sets(args)
    if not (0 <= args.index < len(msets)):
        raise _Failure(EXIT_INPUT, f"min-set index {args.index} out of range (found {len(msets)})")
    w = export_min_set_walk(sys_, msets[args.index])
    report = validate_walk(w)
    text = save_walk(w)
    if args.out:
        _write_text(args.out, text + "\n")
    else:
        print(text)
    return EXIT_OK if report.ok else EXIT_VERIFY


def cmd_spectral_frame(args) -> int:
    sys_, msets = _min_sets(args)
    elems = frame_frequencies(sys_, msets, args.depth)
    buf = io.StringIO()
    wr = csv.writer(buf)
    wr.writerow(["frequency", "coeff_re", "coeff_im"])
    for freq, coeff in elems:
        wr.writerow([str(freq), repr(coeff.real), repr(coeff.imag)])
    if args.out:
        _write_text(args.out, buf.getvalue())
    else:
        sys.stdout.write(buf.getvalue())
    return EXIT_OK


def cmd_spectral_parseval(args) -> int:
    sys_, _msets = _min_sets(args)
    try:
        points = [float(Fraction(p)) for p in args.points]
    except ValueError:
        raise _Failure(EXIT_INPUT, f"test points must be numbers: {args.points}")
    sums = verify_parseval(sys_, points, depth=args.depth)
    ok = True
    doc = {"depth": args.depth, "points": {}}
    for t, seq in sums.items():
        mono = all(b >= a - 1e-12 for a, b in zip(seq, seq[1:]))
        bounded = max(seq) <= 1.0 + 1e-6
        ok = ok and mono and bounded
        doc["points"][repr(t)] = {
            "partial_sums": seq, "final": seq[-1],
            "monotone": mono, "bounded_by_one": bounded,
        }
    _emit(doc, args)
    return EXIT_OK if ok else EXIT_VERIFY


def cmd_verify_all(args) -> int:
    """Re-derive the package's reference answers on the bundled examples."""
    checks: list[tuple[str, bool, str]] = []

    def add(name, ok, detail=""):
        checks.append((name, bool(ok), detail))

    w5 = fixtures.five_vertex_walk()
    w6 = fixtures.six_vertex_walk()
    tri = fixtures.phased_triangle_walk()
    add("five_vertex.valid", validate_walk(w5).ok)
    add("six_vertex.valid", validate_walk(w6).ok)
    add("phased_triangle.valid", validate_walk(tri).ok)

    for name, w, expected in [("five_vertex", w5, 2), ("six_vertex", w6, 3),
                              ("phased_triangle", tri, 1)]:
        space = intertwiner_basis(w, w)
        dim_o, mats = fixed_point_oracle(w, w)
        resid = span_residual(space.basis, mats)
        add(f"{name}.commutant_dim", space.dimension == expected,
            f"structured={space.dimension} expected={expected}")
        add(f"{name}.oracle_agrees", dim_o == space.dimension and resid <= 1e-8,
            f"oracle={dim_o} span_residual={resid:.2e}")

    inter = intertwiner_basis(w5, w6)
    add("five_to_six.intertwiner_dim", inter.dimension == 2, f"dim={inter.dimension}")

    _space, ops = build_dilation(w5, 2)
    rep = verify_cuntz(ops, args.tol)
    add("five_vertex.cuntz_relations", rep.ok(args.tol), json.dumps(rep.to_dict()))

    qf = fixtures.quarter_fourier_system()
    add("quarter_fourier.assumptions", check_assumptions(qf).passed())
    msets = find_min_sets(qf)
    add("quarter_fourier.min_sets",
        [m.points for m in msets] == [(Fraction(0),)], str([m.to_dict() for m in msets]))
    freqs = sorted(int(f) for f, _c in frame_frequencies(qf, msets, 3))
    add("quarter_fourier.depth3_frame", freqs == [0, 1, 4, 5, 16, 17, 20, 21], str(freqs))

    leb = fixtures.lebesgue_system()
    lm = find_min_sets(leb)
    add("lebesgue.min_sets",
        [m.points for m in lm] == [(Fraction(-1),), (Fraction(0),)],
        str([m.to_dict() for m in lm]))

    doc = {"checks": [{"name": n, "ok": ok, "detail": d} for n, ok, d in checks],
           "all_ok": all(ok for _n, ok, _d in checks)}
    _emit(doc, args)
    return EXIT_OK if doc["all_ok"] else EXIT_VERIFY


# -- parser --------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="cuntzwalk",
                                description="Cuntz dilations of labeled weighted random walks")
    p.add_argument("--tol", type=float, default=1e-9, help="verification tolerance")
    p.add_argument("--depth", type=int, default=3, help="truncation / frame depth")
    p.add_argument("--nmax", type=int, default=20, help="max word length for expansions")
    p.add_argument("--format", choices=("json", "text"), default="json")
    p.add_argument("--out", default=None, help="write primary output to this file")
    sub = p.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("analyze", help="validate a walk and report its structure")
    sp.add_argument("walk")
    sp.set_defaults(func=cmd_analyze)

    sp = sub.add_parser("dilate", help="build and verify the truncated Cuntz dilation")
    sp.add_argument("walk")
    sp.set_defaults(func=cmd_dilate)

    sp = sub.add_parser("intertwine", help="intertwiner space between two walks")
    sp.add_argument("walk")
    sp.add_argument("walk2")
    sp.set_defaults(func=cmd_intertwine)

    sp = sub.add_parser("commutant", help="commutant of a single walk's dilation")
    sp.add_argument("walk")
    sp.set_defaults(func=cmd_commutant)

    spec = sub.add_parser("spectral", help="self-affine spectral systems")
    ssub = spec.add_subparsers(dest="spectral_command", required=True)

    sp = ssub.add_parser("check", help="verify the standing assumptions")
    sp.add_argument("system")
    sp.set_defaults(func=cmd_spectral_check)

    sp = ssub.add_parser("minsets", help="finite minimal invariant sets")
    sp.add_argument("system")
    sp.set_defaults(func=cmd_spectral_minsets)

    sp = ssub.add_parser("walk", help="export a min-set as a labeled walk")
    sp.add_argument("system")
    sp.add_argument("--index", type=int, default=0)
    sp.set_defaults(func=cmd_spectral_walk)

    sp = ssub.add_parser("frame", help="frame frequencies as CSV")
    sp.add_argument("system")
    sp.set_defaults(func=cmd_spectral_frame)

    sp = ssub.add_parser("parseval", help="partial Parseval sums at test points")
    sp.add_argument("system")
    sp.add_argument("points", nargs="+")
    sp.set_defaults(func=cmd_spectral_parseval)

    sp = sub.add_parser("verify-all", help="re-run the bundled reference checks")
    sp.set_defaults(func=cmd_verify_all)

    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        with _limit_threads():
            return args.func(args)
    except _Failure as e:
        print(f"error: {e}", file=sys.stderr)
        return e.code
    except (WalkInputError, InvalidWalkError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
