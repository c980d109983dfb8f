"""Command-line front end.

Subcommands: construct, verify, survey, primes, eccount, diagnose.
Exit codes: 0 success / completed report, 1 verification failure,
2 usage or configuration error.  Stdout is deterministic for fixed
inputs; timing goes to stderr.
"""

from __future__ import annotations

import argparse
import json
import sys
import time

import numpy as np

from . import curves, groups, hemisystem, numbers, pg3
from .gf import NotPrime, EvenCharacteristic, FieldTooLarge, is_prime


def _emit(report: dict, fmt: str, out=None) -> None:
    out = out if out is not None else sys.stdout
    if fmt == "json":
        out.write(json.dumps(report, sort_keys=True) + "\n")
    elif fmt == "csv":
        if "rows" in report and "columns" in report:
            out.write(",".join(report["columns"]) + "\n")
            for row in report["rows"]:
                out.write(",".join(str(row[c]) for c in report["columns"]) + "\n")
        else:
            out.write("key,value\n")
            for k in sorted(report):
                out.write(f"{k},{report[k]}\n")
    else:
        if "rows" in report and "columns" in report:
            cols = report["columns"]
            out.write("  ".join(cols) + "\n")
            for row in report["rows"]:
                out.write("  ".join(str(row[c]) for c in cols) + "\n")
        else:
            for k in sorted(report):
                out.write(f"{k} = {report[k]}\n")


def _hist_str(h: dict) -> str:
    return ";".join(f"{k}:{v}" for k, v in sorted(h.items()))


def cmd_construct(args) -> int:
    t0 = time.time()
    if args.family == "cp":
        cand = hemisystem.build_cp(args.p, args.h, seed_orbit=args.seed_orbit,
                                   force=args.force)
        report = hemisystem.verify(cand, threads=args.threads)
    else:
        cand, report = hemisystem.build_ft_verified(
            args.p, args.h, eps=args.eps, force=args.force, threads=args.threads)
    if args.out:
        hemisystem.export(cand, args.out)
    payload = {
        "family": cand.family, "p": cand.p, "h": cand.h, "q": cand.q,
        "lines": int(report.line_count), "expected_lines": report.expected_lines,
        "points": int(report.point_count), "expected_points": report.expected_points,
        "incidence": report.expected_incidence,
        "histogram": _hist_str(report.histogram),
        "passed": report.passed,
        "out": args.out or "",
    }
    for k in ("r", "r_prime", "m1_size", "m2_size", "m2_point", "m2_choice",
              "chords", "orbit_size", "seed_orbit", "chi_used", "tangency_point"):
        if k in cand.provenance:
            payload[k] = cand.provenance[k]
    _emit(payload, args.format)
    print(f"construct: {time.time() - t0:.2f}s", file=sys.stderr)
    return 0 if report.passed else 1


def cmd_verify(args) -> int:
    t0 = time.time()
    cand = hemisystem.import_candidate(args.file)
    report = hemisystem.verify(cand, threads=args.threads)
    payload = {
        "file": args.file, "family": cand.family, "p": cand.p, "h": cand.h,
        "lines": int(report.line_count), "expected_lines": report.expected_lines,
        "points": int(report.point_count), "expected_points": report.expected_points,
        "histogram": _hist_str(report.histogram),
        "passed": report.passed,
    }
    _emit(payload, args.format)
    print(f"verify: {time.time() - t0:.2f}s", file=sys.stderr)
    return 0 if report.passed else 1


def _survey_list(args):
    if args.q_list:
        return [int(x) for x in args.q_list.split(",")]
    qs = []
    for q in range(5, args.q_max + 1):
        if q % 4 != 1:
            continue
        p = next((d for d in range(2, q + 1) if q % d == 0), q)
        if not is_prime(p):
            continue
        m = q
        while m % p == 0:
            m //= p
        if m == 1:
            qs.append(q)
    return qs


def cmd_survey(args) -> int:
    qs = _survey_list(args)
    rows = numbers.survey(qs, threads=args.threads)
    report = {
        "columns": ["q", "N_E3", "conditionB", "p_mod8", "q_square"],
        "rows": [{"q": r.q, "N_E3": r.N_E3,
                  "conditionB": str(r.condition_B).lower(),
                  "p_mod8": r.p_mod_8,
                  "q_square": str(r.q_square).lower()} for r in rows],
    }
    _emit(report, args.format)
    return 0


def cmd_primes(args) -> int:
    ps = numbers.search_primes(args.max)
    report = {"columns": ["n", "p"],
              "rows": [{"n": i + 1, "p": p} for i, p in enumerate(ps)]}
    _emit(report, args.format)
    return 0


def cmd_eccount(args) -> int:
    q = args.p ** args.h
    ctx = numbers._field_of_order(q)
    n_e3 = numbers.count_E3(ctx)
    omega = next(x for x in ctx.elements_by_rank() if x and not ctx.is_square(x))
    rec = numbers.count_C3_C4(ctx, omega)
    payload = {
        "q": q, "N_E3": n_e3, "N_C3": rec.N_C3, "N_C4": rec.N_C4,
        "n_q": rec.n_q, "two_square": rec.two_square,
        "conditionB": n_e3 in (q - 1, q + 3),
        "identities_ok": rec.identities_ok(), "hasse_ok": rec.hasse_ok(),
    }
    if args.h == 1 and args.p % 4 == 1:
        gd = numbers.gauss_alpha1(args.p)
        payload["alpha1"] = gd.alpha1
        payload["alpha2"] = gd.alpha2
        payload["count_from_alpha1"] = args.p + 1 - 2 * gd.alpha1
    _emit(payload, args.format)
    return 0


def cmd_diagnose(args) -> int:
    t0 = time.time()
    fr = curves.ft_frame_setup(args.p, args.h, eps=args.eps)
    sets = curves.ft_point_sets(fr.ctx2)
    G, H, w = groups.ft_group_gens(fr)
    key0, quad0, prov = hemisystem.seed_generator_g0(fr)
    m1 = groups.orbit(fr.ctx2, H.gens, key0)
    g1 = groups.orbit(fr.ctx2, G.gens, key0)
    r, rp = hemisystem.count_r_rprime(fr, np.asarray(m1, dtype=np.int64), "plus")
    m2 = groups.orbit(fr.ctx2, H.gens, hemisystem.ell_line(fr, 1))
    ctxq = numbers._field_of_order(fr.q)
    omega_small = next(x for x in range(1, fr.q) if not ctxq.is_square(x % fr.q))
    rec = numbers.count_C3_C4(ctxq, omega_small)
    quad_ok = groups.quadruple_action_check(fr, args.samples, seed=0)
    q = fr.q
    payload = {
        "p": args.p, "h": args.h, "q": q, "eps": fr.eps, "chi": fr.chi,
        "r": r, "r_prime": rp, "n_q": rec.n_q,
        "two_r_prime_minus_1": 2 * rp - 1,
        "N_E3": rec.N_E3, "conditionB": rec.N_E3 in (q - 1, q + 3),
        "m1_size": len(m1), "g1_size": len(g1),
        "m2_size": len(m2), "g2_size": (q + 1) ** 2,
        "omega_points": len(sets.omega),
        "delta_plus": len(sets.delta_plus), "delta_minus": len(sets.delta_minus),
        "quad_action_ok": quad_ok,
        "seed_tangency": prov["tangency_point"],
        "u_sign_matches_rule": prov["u_sign_matches_rule"],
    }
    _emit(payload, args.format)
    print(f"diagnose: {time.time() - t0:.2f}s", file=sys.stderr)
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="hemisys",
        description="Hemisystems of the Hermitian surface from embedded maximal curves")
    ap.add_argument("--threads", type=int, default=1, metavar="N")
    ap.add_argument("--format", choices=("text", "json", "csv"), default="text")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--threads", type=int, default=argparse.SUPPRESS, metavar="N")
    common.add_argument("--format", choices=("text", "json", "csv"),
                        default=argparse.SUPPRESS)
    sub = ap.add_subparsers(dest="command", required=True)

    c = sub.add_parser("construct", help="build and verify a hemisystem",
                       parents=[common])
    c.add_argument("--family", choices=("cp", "ft"), required=True)
    c.add_argument("--p", type=int, required=True)
    c.add_argument("--h", type=int, default=1)
    c.add_argument("--eps", type=int, choices=(1, -1), default=1)
    c.add_argument("--force", action="store_true")
    c.add_argument("--seed-orbit", choices=("plus", "minus"), default="plus")
    c.add_argument("--out", default=None)
    c.set_defaults(func=cmd_construct)

    v = sub.add_parser("verify", parents=[common], help="verify a candidate file")
    v.add_argument("file")
    v.set_defaults(func=cmd_verify)

    s = sub.add_parser("survey", parents=[common], help="feasibility survey over q = 1 mod 4")
    grp = s.add_mutually_exclusive_group(required=True)
    grp.add_argument("--q-list", default=None)
    grp.add_argument("--q-max", type=int, default=None)
    s.set_defaults(func=cmd_survey)

    pr = sub.add_parser("primes", parents=[common], help="primes of the form 1 + 16 n^2")
    pr.add_argument("--max", type=int, required=True)
    pr.set_defaults(func=cmd_primes)

    e = sub.add_parser("eccount", parents=[common], help="point counts of the feasibility curves")
    e.add_argument("--p", type=int, required=True)
    e.add_argument("--h", type=int, default=1)
    e.set_defaults(func=cmd_eccount)

    d = sub.add_parser("diagnose", parents=[common], help="orbit sizes, balance counts, action checks")
    d.add_argument("--p", type=int, required=True)
    d.add_argument("--h", type=int, default=1)
    d.add_argument("--eps", type=int, choices=(1, -1), default=1)
    d.add_argument("--samples", type=int, default=1000)
    d.set_defaults(func=cmd_diagnose)
    return ap


USAGE_ERRORS = (NotPrime, EvenCharacteristic, FieldTooLarge,
                curves.BadCongruence, curves.TwoNotSquare,
                numbers.NotOneModFour, numbers.OmegaIsSquare,
                hemisystem.ConditionBFails, pg3.TooLarge, ValueError)


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as e:
        return 2 if e.code else 0
    if args.threads < 1:
        print("error: --threads must be >= 1", file=sys.stderr)
        return 2
    try:
        return args.func(args)
    except (hemisystem.ParseError, hemisystem.ChecksumMismatch,
            hemisystem.NotGeneratorInSet) as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    except USAGE_ERRORS as e:
        print(f"error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
