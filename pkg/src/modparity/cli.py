"""Command-line entry point: ``modparity <subcommand> ...``.

Exit status: 0 when the command ran cleanly, 1 when it found anomalies
(disagreements, violations, malformed input lines), 2 on usage errors.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys

from .arith import is_prime, merel_criterion, represent_u2_plus_16v2
from .classify import predict_parity_prime_level, theorem_one_filter
from .curve import SingularCurveError, derive_invariants
from .modsym import MAX_LEVEL

EXIT_OK, EXIT_ANOMALY, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


def _curve(text: str):
    try:
        a = json.loads(text)
    except json.JSONDecodeError as exc:
        raise UsageError(f"--curve must look like [a1,a2,a3,a4,a6]: {exc}") from None
    if not isinstance(a, list) or len(a) != 5 or not all(isinstance(x, int) for x in a):
        raise UsageError("--curve needs five integers")
    try:
        return derive_invariants(*a)
    except SingularCurveError as exc:
        raise UsageError(str(exc)) from None


def _prime_level(n: int) -> int:
    if n < 2 or not is_prime(n):
        raise UsageError(f"level {n} is not prime")
    if n > MAX_LEVEL:
        raise UsageError(f"level {n} is above the supported range {MAX_LEVEL}")
    return n


def cmd_classify(args) -> int:
    E = _curve(args.curve)
    try:
        v = theorem_one_filter(E, args.conductor, args.rank_parity)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    print(json.dumps(v.as_dict(), indent=2))
    return EXIT_OK


def cmd_hecke(args) -> int:
    from .hecke2 import Mod2Algebra, decompose_mod2, hecke_lattice, tm_equals_z2
    from .modsym import build_space

    N = _prime_level(args.level)
    lat = hecke_lattice(build_space(N))
    alg = Mod2Algebra(lat)
    factors = decompose_mod2(lat, alg)
    if args.dump_structure:
        sys.stdout.write(alg.dump())
        return EXIT_OK
    print("level\trank\tresidue_degree\tlocal_dim\teisenstein\ttm_is_z2\tfield")
    for f in factors:
        s = f.summary()
        print(f"{N}\t{lat.rank}\t{f.residue_degree}\t{f.local_dim}\t{str(f.eisenstein).lower()}"
              f"\t{str(bool(tm_equals_z2(f))).lower()}\t{s['field']}")
    return EXIT_OK


def cmd_parity(args) -> int:
    N = _prime_level(args.level)
    E = _curve(args.curve)
    try:
        v = predict_parity_prime_level(E, N)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    print(json.dumps(v.as_dict(), indent=2))
    return EXIT_OK


def cmd_merel(args) -> int:
    from .classify import level_data

    print("N\tu\tv\tcriterion\teisenstein_dim\tagree")
    bad = 0
    for N in range(17, args.max + 1, 8):
        if not is_prime(N):
            continue
        rep = represent_u2_plus_16v2(N)
        crit = merel_criterion(N)
        line = f"{N}\t{rep.u}\t{rep.v}\t{str(crit).lower()}"
        if args.check:
            dims = [f.local_dim for f in level_data(N).factors if f.eisenstein]
            ok = len(dims) == 1 and crit == (dims[0] >= 2)
            bad += not ok
            line += f"\t{','.join(map(str, dims))}\t{str(ok).lower()}"
        else:
            line += "\t\t"
        print(line)
    return EXIT_ANOMALY if bad else EXIT_OK


def cmd_audit(args) -> int:
    from .ingest import AuditOptions, DEFAULT_PREDICTION_LEVEL, audit, parse_allcurves, parse_degphi
    from .report import render_figures, to_json, to_tsv

    try:
        with open(args.allcurves) as fh:
            parsed = parse_allcurves(fh)
        with open(args.degphi) as fh:
            degrees = parse_degphi(fh)
    except OSError as exc:
        raise UsageError(str(exc)) from None
    opts = AuditOptions(max_level=args.max_level,
                        prediction_max_level=MAX_LEVEL if args.slow else DEFAULT_PREDICTION_LEVEL,
                        threads=args.threads)
    report = audit(parsed, degrees, opts)
    text = to_json(report) if args.format == "json" else to_tsv(report)
    if args.output:
        with open(args.output, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    if args.figures:
        for p in render_figures(report, args.figures):
            logging.getLogger(__name__).info("wrote %s", p)
    for w in degrees.warnings:
        print(f"warning: {w}", file=sys.stderr)
    anomalies = report.anomalies()
    for a in anomalies:
        print(f"anomaly: {a}", file=sys.stderr)
    return EXIT_ANOMALY if anomalies else EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="modparity", description="Parity of modular degrees of elliptic curves.")
    p.add_argument("--threads", type=int, default=1, help="worker processes for per-level work")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    c = sub.add_parser("classify", help="necessary conditions for odd degree")
    c.add_argument("--curve", required=True)
    c.add_argument("--conductor", type=int, required=True)
    c.add_argument("--rank-parity", choices=("odd", "even"))
    c.set_defaults(func=cmd_classify)

    h = sub.add_parser("hecke", help="local factors of T/2T at a prime level")
    h.add_argument("--level", type=int, required=True)
    h.add_argument("--dump-structure", action="store_true")
    h.set_defaults(func=cmd_hecke)

    q = sub.add_parser("parity", help="degree parity at prime level")
    q.add_argument("--level", type=int, required=True)
    q.add_argument("--curve", required=True)
    q.set_defaults(func=cmd_parity)

    m = sub.add_parser("merel", help="primes 1 mod 8 and the u^2 + 16v^2 criterion")
    m.add_argument("--max", type=int, required=True)
    m.add_argument("--check", action="store_true", help="also compute the Eisenstein factor")
    m.set_defaults(func=cmd_merel)

    a = sub.add_parser("audit", help="audit a Cremona-style dataset")
    a.add_argument("--allcurves", required=True)
    a.add_argument("--degphi", required=True)
    a.add_argument("--max-level", type=int)
    a.add_argument("--format", choices=("json", "tsv"), default="json")
    a.add_argument("--slow", action="store_true", help=f"predict parity at every prime level up to {MAX_LEVEL}")
    a.add_argument("--output", help="write the report here instead of stdout")
    a.add_argument("--figures", metavar="DIR", help="render PNG figures into DIR")
    a.set_defaults(func=cmd_audit)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if args.threads < 1:
        parser.error("--threads must be positive")
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"modparity: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
