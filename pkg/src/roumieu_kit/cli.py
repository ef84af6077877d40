"""Command-line front end.

Exit status: 0 holds (or plain data output), 2 fails, 3 inconclusive or an
error asking for a deeper prefix / longer grid, 1 unreadable input, 4 a
contradictory equivalence report.
"""
from __future__ import annotations

import argparse
import math
import os
import sys
from dataclasses import dataclass, field

import numpy as np

from . import io as rio
from . import plotting
from .config import FORMATS, RunConfig, load_config
from .errors import InvalidArgument, InvalidSequence, RoumieuError
from .family import N_from_r, r_from_N
from .matrices import (SCHEDULES, WeightMatrix, check_matrix_M2prime, vset_membership,
                       vset_sample, vset_star_membership, witness_diagonal, witness_sup)
from .seminorms import (DerivativeBoundProfile, corpus, equivalence_report, seminorm_Mh,
                        seminorm_omega_rho, seminorm_r, sweep_matrices)
from .sequences import (WeightSequence, associated_function_grid, check_condition,
                        log_convex_minorant)
from .verdict import FAILS, HOLDS, INCONCLUSIVE, Verdict, combine
from .weights import (check_weight_function, geometric_grid, matrix_from_omega,
                      young_conjugate)

EXIT = {HOLDS: 0, FAILS: 2, INCONCLUSIVE: 3}
EXIT_PARSE = 1
EXIT_INCONSISTENT = 4


@dataclass
class Result:
    """What a subcommand produced: an optional verdict, a JSON payload, an
    optional table for CSV output and extra files for ``--out``."""

    data: dict
    verdict: Verdict | None = None
    table: tuple[list[str], list] | None = None
    files: dict[str, str | bytes] = field(default_factory=dict)
    exit_code: int | None = None

    @property
    def code(self) -> int:
        if self.exit_code is not None:
            return self.exit_code
        return EXIT[self.verdict.status] if self.verdict is not None else 0


def _config(args) -> RunConfig:
    cfg = load_config(args.config)
    return cfg.with_overrides(depth=args.depth, nmax=args.nmax, tol_prec=args.tol_prec,
                              threshold=args.threshold, format=args.format)


def _verdict_table(v: Verdict):
    rows = [("overall", v.status, v.trace)]
    rows += [(name, part.status, part.trace) for name, part in v.parts.items()]
    return ["check", "status", "trace"], rows


def _seq_table(seq: WeightSequence, P: int, name="log_value"):
    return ["p", name], [(p, float(x)) for p, x in enumerate(seq.logs(P))]


# ---------------------------------------------------------------------------
# subcommands

def cmd_check(args, cfg: RunConfig) -> Result:
    kind, obj = rio.load(args.file, pmax=cfg.depth, nmax=args.nmax)
    P = cfg.depth
    if kind == "sequence":
        conds = args.cond or ["M0", "M1", "M2prime"]
        parts = {}
        for c in conds:
            # a tabulated prefix is checked as deep as it goes; (M.2)' needs one more entry
            Pc = P
            if obj.depth is not None:
                shift = 1 if "2" in c else 0
                Pc = min(P, obj.depth - shift)
            parts[c] = check_condition(obj, c, Pc)
        P = min(v.checked_up_to for v in parts.values())
        v = parts[conds[0]] if len(parts) == 1 else combine(parts, P)
    elif kind == "matrix":
        conds = args.cond or ["M2prime"]
        parts = {}
        for c in conds:
            key = c.replace("'", "prime").replace(".", "").lower()
            if key == "m2prime":
                parts[c] = check_matrix_M2prime(obj, P)
            elif key == "monotone":
                parts[c] = obj.check_rows_monotone(P)
            else:
                parts[c] = combine({f"row{n}": check_condition(r, c, P)
                                    for n, r in obj.distinct_rows()}, P)
        v = parts[conds[0]] if len(parts) == 1 else combine(parts, P)
    elif kind == "omega":
        v = check_weight_function(obj, geometric_grid(cfg.t_min, cfg.t_max, cfg.t_points),
                                  cfg.tol_prec)
    else:
        raise InvalidArgument(f"check expects a sequence, matrix or weight function, got {kind}")
    return Result({"input": kind, "verdict": v.to_dict()}, v, _verdict_table(v))


def cmd_minorant(args, cfg: RunConfig) -> Result:
    _, seq = rio.load(args.file, "sequence")
    P = seq.depth if seq.depth is not None else cfg.depth
    mc = log_convex_minorant(seq, P)
    rows = [(p, float(a), float(b)) for p, (a, b) in enumerate(zip(seq.logs(P), mc.logs(P)))]
    return Result({"minorant": mc.to_dict(P)}, None,
                  (["p", "log_N", "log_minorant"], rows))


def cmd_associated(args, cfg: RunConfig) -> Result:
    _, seq = rio.load(args.file, "sequence")
    P = min(cfg.depth, seq.depth) if seq.depth is not None else cfg.depth
    t = geometric_grid(args.tmin, args.tmax, args.points)
    vals, arg = associated_function_grid(seq, t, P)
    rows = [(float(a), float(b), int(k)) for a, b, k in zip(t, vals, arg)]
    boundary = bool(np.any(arg == P))
    files = {}
    if args.plot:
        files["associated.png"] = plotting.associated_figure(t, vals)
    data = {"depth": P, "boundary_attained": boundary,
            "t": t.tolist(), "omega": vals.tolist(), "argmax": arg.tolist()}
    return Result(data, None, (["t", "omega_N", "argmax_p"], rows), files)


def cmd_conjugate(args, cfg: RunConfig) -> Result:
    _, om = rio.load(args.file, "omega")
    y_max = args.ymax if args.ymax is not None else cfg.y_max
    conj = young_conjugate(om, y_max, args.points or cfg.y_points, tol=cfg.tol_conj)
    v = conj.invariants()
    files = {}
    if args.plot:
        files["conjugate.png"] = plotting.conjugate_figure(conj.y, conj.values)
    data = {"omega": om.to_dict(), "y": conj.y.tolist(), "phi_star": conj.values.tolist(),
            "resolution_error": conj.resolution_error, "invariants": v.to_dict()}
    return Result(data, v, (["y", "phi_star"], conj.rows()), files)


def cmd_matrix_from_omega(args, cfg: RunConfig) -> Result:
    _, om = rio.load(args.file, "omega")
    P = cfg.depth
    mat = matrix_from_omega(om, cfg.nmax, P)
    parts = {}
    for n, row in mat.distinct_rows():
        parts[f"row{n}"] = combine({c: check_condition(row, c, P) for c in ("M0", "M1")}, P)
    parts["M2prime"] = check_matrix_M2prime(mat, P)
    v = combine(parts, P)
    rows = [(n, p, float(x)) for n, r in enumerate(mat.rows) for p, x in enumerate(r.logs(P))]
    return Result({"matrix": mat.to_dict(P), "verdict": v.to_dict()}, v,
                  (["n", "p", "log_M"], rows))


def cmd_vset_test(args, cfg: RunConfig) -> Result:
    _, N = rio.load(args.sequence, "sequence")
    _, mat = rio.load(args.matrix, "matrix", pmax=cfg.depth, nmax=args.nmax)
    fn = vset_star_membership if args.star else vset_membership
    v = fn(N, mat, cfg.depth, cfg.tol_prec)
    return Result({"verdict": v.to_dict()}, v, _verdict_table(v))


def cmd_sample(args, cfg: RunConfig) -> Result:
    _, mat = rio.load(args.matrix, "matrix", pmax=cfg.depth, nmax=args.nmax)
    N = vset_sample(mat, SCHEDULES[args.schedule], cfg.depth, check=not args.no_check,
                    tau=cfg.tol_prec)
    return Result(N.to_dict(cfg.depth), None, _seq_table(N, cfg.depth))


def _profile_or_sequence(path):
    kind, obj = rio.load(path, ("profile", "sequence"))
    return obj.sequence if isinstance(obj, DerivativeBoundProfile) else obj


def cmd_witness(args, cfg: RunConfig) -> Result:
    a = _profile_or_sequence(args.sequence)
    _, mat = rio.load(args.matrix, "matrix", pmax=cfg.depth, nmax=args.nmax)
    P = cfg.depth
    if args.sup:
        w = witness_sup(a, mat, cfg.nmax if mat.unbounded else mat.nmax, P)
        check = a.logs(P) + w.sequence.logs(P)
        v = Verdict(HOLDS, P, {"max_log_aN": float(check.max())},
                    trace="a_p N_p <= 1 on the prefix")
    else:
        w = witness_diagonal(a, mat, P, thresholds=(cfg.threshold,))
        ok = all(r >= math.log(n) for (_, n), r in zip(w.blocks[1:], w.log_start_ratios))
        v = Verdict(HOLDS if ok else FAILS, P, {"blocks": len(w.blocks)},
                    trace="a_(p_n)/N_(p_n) >= n at every block start")
    rows = [(p, float(x)) for p, x in enumerate(w.sequence.logs(P))]
    return Result({"witness": w.to_dict(), "verdict": v.to_dict()}, v,
                  (["p", "log_N"], rows))


def cmd_convert(args, cfg: RunConfig) -> Result:
    _, M = rio.load(args.base, "sequence")
    P = cfg.depth if M.depth is None else min(cfg.depth, M.depth)
    if args.to == "N":
        _, r = rio.load(args.other, "r")
        if r.depth is not None:
            P = min(P, r.depth)
        N = N_from_r(M, r, P)
        return Result(N.to_dict(P), None, _seq_table(N, P))
    _, N = rio.load(args.other, "sequence")
    if N.depth is not None:
        P = min(P, N.depth)
    r, kappa = r_from_N(M, N, P, cfg.tol_prec)
    data = {**r.to_dict(), "kappa": kappa}
    return Result(data, None, (["j", "r_j"], r.rows()))


def cmd_seminorm(args, cfg: RunConfig) -> Result:
    _, prof = rio.load(args.profile, ("profile", "sequence"))
    kind, weight = rio.load(args.weight, ("sequence", "omega"))
    P = cfg.depth
    if kind == "omega":
        rho = args.rho if args.rho is not None else 1.0
        conj = young_conjugate(weight, max(cfg.y_max, rho * P), cfg.y_points, tol=cfg.tol_conj)
        s = seminorm_omega_rho(prof, conj, rho, P)
        label = f"omega,rho={rho:g}"
    elif args.r is not None:
        _, r = rio.load(args.r, "r")
        s = seminorm_r(prof, weight, r, P)
        label = "r"
    else:
        h = args.h if args.h is not None else 1.0
        s = seminorm_Mh(prof, weight, h, P)
        label = f"M,h={h:g}"
    status = HOLDS if s.finite else INCONCLUSIVE
    v = Verdict(status, P, {"value": s.value, "argmax": s.argmax},
                trace="boundary attained" if s.boundary else
                ("partial maxima still growing" if not s.stabilized else "stabilised"))
    return Result({"seminorm": label, **s.to_dict()}, v,
                  (["p", "log_ratio", "log_partial_max"], s.trace_rows()))


def _demo_files(rep, samples, cfg: RunConfig, prefix=""):
    P = cfg.depth
    files = {}
    t = geometric_grid(1.0, 1e8, 321)
    traces = {}
    assoc = {}
    for i, (N, s) in enumerate(zip(samples, rep.seminorms)):
        files[f"{prefix}sample{i}_trace.csv"] = rio.csv_text(
            ["p", "log_ratio", "log_partial_max"], s.trace_rows())
        vals, arg = associated_function_grid(N, t, P)
        files[f"{prefix}sample{i}_associated.csv"] = rio.csv_text(
            ["t", "omega_N", "argmax_p"], [(float(a), float(b), int(k))
                                           for a, b, k in zip(t, vals, arg)])
        traces[f"sample {i}"] = (np.arange(P + 1), s.partial_log_max)
        assoc[f"sample {i}"] = (t, vals)
    if rep.witness is not None:
        files[f"{prefix}witness.json"] = rio.dumps(rep.witness)
        traces["diagonal witness"] = (np.arange(P + 1), rep.witness.log_partial_sups)
    files[f"{prefix}partial_sups.png"] = plotting.partial_sups_figure(traces)
    files[f"{prefix}associated.png"] = plotting.line_figure(
        assoc, "t", "omega_N(t)", "associated functions of the samples", logx=True)
    return files


def _demo_samples(mat: WeightMatrix, cfg: RunConfig):
    return [vset_sample(mat, SCHEDULES[name], cfg.depth, check=True, tau=cfg.tol_prec)
            for name in ("linear", "half")]


def cmd_demo(args, cfg: RunConfig) -> Result:
    header = cfg.to_dict()
    if args.corpus:
        mats = sweep_matrices(cfg.nmax, cfg.depth)
        entries, files, bad = [], {}, []
        for mname, mat in mats.items():
            samples = _demo_samples(mat, cfg)
            for prof in corpus():
                rep = equivalence_report(prof, mat, cfg.depth, cfg.h_grid, cfg.threshold,
                                         cfg.tol_prec, samples, mname, header)
                entries.append({"profile": prof.name, "matrix": mname,
                                "inductive": rep.inductive.status,
                                "projective": rep.projective.status,
                                "consistent": rep.consistent})
                if not rep.consistent:
                    bad.append(entries[-1])
                files[f"{mname}__{prof.name}.json"] = rio.dumps(rep)
        rows = [(e["profile"], e["matrix"], e["inductive"], e["projective"], e["consistent"])
                for e in entries]
        data = {"config": header, "reports": entries, "consistent": not bad}
        return Result(data, None, (["profile", "matrix", "inductive", "projective",
                                    "consistent"], rows), files,
                      EXIT_INCONSISTENT if bad else 0)
    if args.profile is None or args.matrix is None:
        raise InvalidArgument("demo needs PROFILE and MATRIX files, or --corpus")
    _, prof = rio.load(args.profile, "profile")
    _, mat = rio.load(args.matrix, "matrix", pmax=cfg.depth, nmax=args.nmax)
    samples = _demo_samples(mat, cfg)
    rep = equivalence_report(prof, mat, cfg.depth, cfg.h_grid, cfg.threshold, cfg.tol_prec,
                             samples, os.path.basename(args.matrix), header)
    files = {"report.json": rio.dumps(rep), **_demo_files(rep, samples, cfg)}
    rows = [("inductive", rep.inductive.status, rep.inductive.trace),
            ("projective", rep.projective.status, rep.projective.trace),
            ("consistent", str(rep.consistent), "")]
    code = 0 if rep.consistent else EXIT_INCONSISTENT
    if not rep.consistent:
        print(f"inconsistent report: inductive={rep.inductive.status} "
              f"projective={rep.projective.status}", file=sys.stderr)
    return Result(rep.to_dict(), None, (["side", "status", "trace"], rows), files, code)


# ---------------------------------------------------------------------------
# parser

def _common() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--depth", type=int, help="prefix depth P (default 200)")
    p.add_argument("--nmax", type=int, help="materialised matrix rows (default 8)")
    p.add_argument("--tol-prec", type=float, help="tail-decay tolerance (default 0.1)")
    p.add_argument("--threshold", type=float, help="divergence threshold (default 1e6)")
    p.add_argument("--format", choices=FORMATS, help="stdout format (default json)")
    p.add_argument("--out", metavar="DIR", help="also write result files into DIR")
    p.add_argument("--config", metavar="FILE", help="key = value config file")
    return p


def build_parser() -> argparse.ArgumentParser:
    common = _common()
    parser = argparse.ArgumentParser(
        prog="roumieu-kit", description="Weight sequences, matrices and seminorm checks.")
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, fn, help_):
        p = sub.add_parser(name, parents=[common], help=help_)
        p.set_defaults(func=fn)
        return p

    p = add("check", cmd_check, "check conditions of a sequence, matrix or weight function")
    p.add_argument("file")
    p.add_argument("--cond", action="append",
                   help="condition (M0, M1, M2prime; repeatable)")
    p = add("minorant", cmd_minorant, "log-convex minorant of a sequence")
    p.add_argument("file")
    p = add("associated", cmd_associated, "associated function on a geometric t-grid")
    p.add_argument("file")
    p.add_argument("--tmin", type=float, default=1.0)
    p.add_argument("--tmax", type=float, default=1e8)
    p.add_argument("--points", type=int, default=321)
    p.add_argument("--plot", action="store_true", help="render a PNG into --out")
    p = add("conjugate", cmd_conjugate, "Young conjugate of phi(x) = omega(e^x)")
    p.add_argument("file")
    p.add_argument("--ymax", type=float)
    p.add_argument("--points", type=int)
    p.add_argument("--plot", action="store_true", help="render a PNG into --out")
    p = add("matrix-from-omega", cmd_matrix_from_omega, "weight matrix of a weight function")
    p.add_argument("file")
    p = add("vset-test", cmd_vset_test, "membership of N in V(M)")
    p.add_argument("sequence")
    p.add_argument("matrix")
    p.add_argument("--star", action="store_true", help="also require (M.1)")
    p = add("sample", cmd_sample, "sample an element of V(M)")
    p.add_argument("matrix")
    p.add_argument("--schedule", choices=sorted(SCHEDULES), default="linear")
    p.add_argument("--no-check", action="store_true")
    p = add("witness", cmd_witness, "diagonal or sup witness construction")
    g = p.add_mutually_exclusive_group()
    g.add_argument("--diagonal", action="store_true", help="block construction (default)")
    g.add_argument("--sup", action="store_true", help="sup construction")
    p.add_argument("sequence")
    p.add_argument("matrix")
    p = add("convert", cmd_convert, "product weights N from r, or r from N")
    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument("--to-N", dest="to", action="store_const", const="N")
    g.add_argument("--to-r", dest="to", action="store_const", const="r")
    p.add_argument("base", help="the weight sequence M")
    p.add_argument("other", help="r (for --to-N) or N (for --to-r)")
    p = add("seminorm", cmd_seminorm, "evaluate one seminorm on a profile")
    p.add_argument("profile")
    p.add_argument("weight", help="weight sequence or weight function")
    p.add_argument("--h", type=float)
    p.add_argument("--rho", type=float)
    p.add_argument("--r", metavar="FILE", help="product weights with this r")
    p = add("demo", cmd_demo, "equivalence report of both seminorm systems")
    p.add_argument("profile", nargs="?")
    p.add_argument("matrix", nargs="?")
    p.add_argument("--corpus", action="store_true", help="sweep the shipped corpus")
    return parser


def _render(res: Result, fmt: str) -> str:
    if fmt == "json":
        return rio.dumps(res.data)
    if fmt == "csv":
        if res.table is not None:
            return rio.csv_text(*res.table)
        return rio.csv_text(["key", "value"], sorted(
            (k, rio.dumps(v).strip()) for k, v in rio.to_jsonable(res.data).items()))
    lines = []
    if res.verdict is not None:
        lines.append(str(res.verdict))
    if res.table is not None:
        header, rows = res.table
        if res.verdict is None or len(rows) <= 40:
            lines.append("  ".join(header))
            lines.extend("  ".join(_fmt(c) for c in row) for row in rows)
    return "\n".join(lines) + "\n"


def _fmt(c):
    return f"{c:.10g}" if isinstance(c, float) else str(c)


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = _config(args)
        res = args.func(args, cfg)
    except (InvalidArgument, InvalidSequence) as exc:
        print(f"error ({exc.code}): {exc}", file=sys.stderr)
        return EXIT_PARSE
    except RoumieuError as exc:
        # the prefix or grid is too short to decide; not a malformed input
        print(f"inconclusive ({exc.code}): {exc}", file=sys.stderr)
        return EXIT[INCONCLUSIVE]
    text = _render(res, cfg.format)
    try:
        sys.stdout.write(text)
        sys.stdout.flush()
    except BrokenPipeError:
        # downstream closed early (e.g. piped into head); the files below still get written
        sys.stdout = open(os.devnull, "w")
    if args.out:
        ext = {"json": "json", "csv": "csv", "text": "txt"}[cfg.format]
        rio.write_atomic(os.path.join(args.out, f"{args.command}.{ext}"), text)
        if cfg.format != "csv" and res.table is not None:
            rio.write_atomic(os.path.join(args.out, f"{args.command}.csv"),
                             rio.csv_text(*res.table))
        for name, data in sorted(res.files.items()):
            rio.write_atomic(os.path.join(args.out, name), data)
    return res.code


if __name__ == "__main__":
    sys.exit(main())
