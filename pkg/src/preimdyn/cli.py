"""Command-line front end: ``preimdyn <subcommand> ...``.

A JSON file passed with ``--config`` may supply any long option of the
chosen subcommand (dashes or underscores); explicit flags win.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

from preimdyn.arith import INF, format_point, parse_rational
from preimdyn.errors import DegreeDrop, HypothesisViolated, InvariantFailure, NotApplicable, PreimError

EXIT_OK, EXIT_ERROR, EXIT_HYPOTHESIS, EXIT_INVARIANT = 0, 1, 2, 3


def _map_arg(s: str):
    from preimdyn.dynamics import new_ratmap
    from preimdyn.exprparse import parse_ratfunc

    return new_ratmap(parse_ratfunc(s, "x"))


def _family(args):
    from preimdyn.curves import POLY_QUAD, RAT_QUAD, QuadFamily
    from preimdyn.exprparse import parse_poly

    kind = {"polyquad": POLY_QUAD, "ratquad": RAT_QUAD}[args.family.lower()]
    a, b, c = (parse_poly(str(v), "t") for v in (args.a, args.b, args.c))
    return QuadFamily(kind, a, b, c)


def _point(s: str):
    s = str(s).strip()
    return INF if s.lower() in ("inf", "oo", "infinity") else parse_rational(s)


def _emit(obj, as_json: bool, text: str):
    print(json.dumps(obj, indent=2) if as_json else text)


def cmd_preim(args) -> int:
    from preimdyn.preimage import preimage_set

    phi = _map_arg(args.map)
    tree = preimage_set(phi, _point(args.target), max_nodes=args.max_nodes)
    pts = sorted(tree.preimages, key=lambda P: (1, 0) if P is INF else (0, P))
    obj = {
        "map": args.map,
        "target": str(args.target),
        "count": len(pts),
        "max_depth": tree.max_depth,
        "preimages": [format_point(P) for P in pts],
    }
    _emit(obj, args.json, f"|Preim| = {len(pts)} (depth {tree.max_depth}): {', '.join(obj['preimages'])}")
    return EXIT_OK


def cmd_orbit(args) -> int:
    from preimdyn.dynamics import is_preperiodic

    res = is_preperiodic(_map_arg(args.map), _point(args.point))
    print(res.describe())
    return EXIT_OK


def cmd_height(args) -> int:
    from preimdyn.dynamics import canonical_height

    iv = canonical_height(_map_arg(args.map), _point(args.point), float(args.eps))
    print(f"[{iv.lo:.15g}, {iv.hi:.15g}]")
    return EXIT_OK


def cmd_curve(args) -> int:
    from preimdyn.curves import component_to_json, components, enumerate_until_stable

    fam = _family(args)
    if args.stable_upto is not None:
        st = enumerate_until_stable(fam, int(args.stable_upto), cap=args.cap)
        print(f"stable at level {st.level}: {len(st)} curve(s) of deg_x <= {args.stable_upto}")
        comps = st.components
    else:
        comps = components(fam, int(args.level))
    for comp in comps:
        if args.json:
            print(component_to_json(comp))
        else:
            print(f"{comp.component_id} deg_x={comp.deg_x} constants={comp.constants} x_N = {comp.x!r}")
    return EXIT_OK


def cmd_places(args) -> int:
    from preimdyn.curves import components
    from preimdyn.infinity import places_at_infinity

    for comp in components(_family(args), int(args.level)):
        rep = places_at_infinity(comp)
        if args.json:
            print(json.dumps(rep.to_dict(), sort_keys=False))
        else:
            desc = ", ".join(f"(e={P.e}, f={P.f})" for P in rep.places)
            print(f"{comp.component_id} deg_x={comp.deg_x}: {desc}; rational={rep.rational_count} orbits={rep.orbit_count}")
    return EXIT_OK


def cmd_sweep(args) -> int:
    from preimdyn.harness import SweepSpec, records_to_csv, summarize, sweep

    spec = SweepSpec(_family(args), int(args.height_cap), s_cap=args.s_cap, workers=int(args.workers))
    recs = sweep(spec)
    Path(args.out).write_text(records_to_csv(recs))
    print(summarize(recs).describe())
    return EXIT_OK


def cmd_bounds(args) -> int:
    from preimdyn.preimage import evertse_bound, kappa_prime_loglog, mu_bound

    d, s = int(args.d), int(args.s)
    E = evertse_bound(d, s)
    kb = kappa_prime_loglog(d, s)
    refined, coarse = mu_bound(d)
    print(f"evertse_bound({d}, {s}) = 2^{math.log2(E):.6g}" + (f" = {E}" if E.bit_length() <= 64 * 8 else ""))
    print(f"mu_bound({d}) = ({refined}, {coarse})")
    print(f"log(log log kappa') = 20 d log d + log s = {kb.log_loglog_kappa:.6f}")
    depth = kb.depth_bound if kb.depth_is_exact and kb.depth_bound.bit_length() <= 256 else None
    print(f"chain-length bound: log2 N <= {kb.depth_bound_log2:.6g}" + (f" (N = {depth})" if depth else ""))
    return EXIT_OK


def cmd_check(args) -> int:
    from preimdyn.curves import QuadFamily
    from preimdyn.harness import example21_check, swap_identity_check
    from preimdyn.infinity import theorem_bound_check
    from preimdyn.poly import Poly

    t = Poly.x()
    if args.suite == "example21":
        ok = example21_check(4)
        print(f"iterate identities N <= 4: {'ok' if ok else 'FAIL'}")
    elif args.suite == "swap":
        res = swap_identity_check(t, Poly([1]), range(-20, 21))
        bad = [k for k, v in res.items() if v is not None and v[0] != v[1]]
        ok = not bad
        print(f"swap identity on {sum(v is not None for v in res.values())} values: {'ok' if ok else 'FAIL ' + str(bad)}")
    else:
        cases = [
            (QuadFamily.poly(0, t), 5),
            (QuadFamily.rat(1, t, 1), 3),
            (QuadFamily.rat(t, 1, 0), 3),
        ]
        for fam, N in cases:
            for n in range(1, N + 1):
                for chk in theorem_bound_check(fam, n):
                    print(f"{fam} N={n} {chk.describe()}")
        ok = True
    return EXIT_OK if ok else EXIT_INVARIANT


def _family_opts(p: argparse.ArgumentParser, level: bool = True):
    p.add_argument("--family", choices=["polyquad", "ratquad", "PolyQuad", "RatQuad"])
    p.add_argument("--a", default="0")
    p.add_argument("--b")
    p.add_argument("--c")
    if level:
        p.add_argument("--level", type=int, default=1)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="preimdyn", allow_abbrev=False, description="Rational iterated preimages and preimage curves.")
    ap.add_argument("--config", help="JSON file with default option values")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("preim", help="rational iterated preimages of a target")
    p.add_argument("--map")
    p.add_argument("--target", default="0")
    p.add_argument("--max-nodes", type=int, default=None)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_preim)

    p = sub.add_parser("orbit", help="preperiodicity of a point")
    p.add_argument("--map")
    p.add_argument("--point")
    p.set_defaults(func=cmd_orbit)

    p = sub.add_parser("height", help="canonical height interval")
    p.add_argument("--map")
    p.add_argument("--point")
    p.add_argument("--eps", default="1e-9")
    p.set_defaults(func=cmd_height)

    p = sub.add_parser("curve", help="components of the level-N preimage curve")
    _family_opts(p)
    p.add_argument("--stable-upto", type=int, default=None)
    p.add_argument("--cap", type=int, default=12)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_curve)

    p = sub.add_parser("places", help="places at infinity of each component")
    _family_opts(p)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_places)

    p = sub.add_parser("sweep", help="preimage counts over a height-bounded t grid")
    _family_opts(p, level=False)
    p.add_argument("--height-cap", type=int)
    p.add_argument("--s-cap", type=int, default=None)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--out", default="sweep.csv")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("bounds", help="unit-equation bound calculators")
    p.add_argument("--d", type=int, default=2)
    p.add_argument("--s", type=int, default=1)
    p.set_defaults(func=cmd_bounds)

    p = sub.add_parser("check", help="built-in identity suites")
    p.add_argument("--suite", choices=["example21", "swap", "tr-bounds"], default="example21")
    p.set_defaults(func=cmd_check)
    return ap


def _apply_config(ap: argparse.ArgumentParser, argv: list[str]) -> argparse.Namespace:
    pre = argparse.ArgumentParser(add_help=False, allow_abbrev=False)
    pre.add_argument("--config")
    known, _ = pre.parse_known_args(argv)
    if known.config:
        cfg = json.loads(Path(known.config).read_text())
        cfg = {k.replace("-", "_"): v for k, v in cfg.items()}
        for action in ap._subparsers._group_actions:
            for sp in action.choices.values():
                valid = {a.dest for a in sp._actions}
                sp.set_defaults(**{k: v for k, v in cfg.items() if k in valid})
    return ap.parse_args(argv)


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    ap = build_parser()
    args = _apply_config(ap, argv)
    try:
        return args.func(args)
    except (HypothesisViolated, DegreeDrop, NotApplicable) as e:
        print(f"hypothesis violated: {e}", file=sys.stderr)
        return EXIT_HYPOTHESIS
    except InvariantFailure as e:
        print(f"internal invariant failed: {e}", file=sys.stderr)
        return EXIT_INVARIANT
    except (PreimError, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
