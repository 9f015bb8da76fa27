"""Command-line front end.

Exit codes: 0 success, 1 a legitimate negative answer (no witness, frame
refutes, verification failed), 2 usage or input error, 3 budget exceeded,
4 an internal invariant was violated.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import dataclass
from pathlib import Path

from . import formula as fm
from .algebra import algebra_from_dict, algebra_to_dict, dual_algebra, dual_frame
from .errors import BudgetExceeded, InvariantViolation, MSLError, ParseError
from .frame import (DEFAULT_ENUM_CAP, DEFAULT_VALUATION_BUDGET, enumerate_frames, frame_from_dict,
                    frame_to_dict, is_cycle_free, is_pretransitive, is_rooted, model_from_dict,
                    ranks_to_dict, refuting_valuation, upsets)
from .maps import (DEFAULT_SEARCH_BUDGET, DomainSet, domainset_from_dict, is_pmorphism,
                   is_stable, is_surjective, pointmap_from_dict, pointmap_to_dict,
                   satisfies_cdc)

EXIT_OK, EXIT_NEGATIVE, EXIT_USAGE, EXIT_BUDGET, EXIT_INTERNAL = 0, 1, 2, 3, 4


@dataclass(frozen=True)
class Config:
    valuation_budget: int = DEFAULT_VALUATION_BUDGET
    search_budget: int = DEFAULT_SEARCH_BUDGET
    enum_cap: int = DEFAULT_ENUM_CAP
    seed: int = 0
    deterministic: bool = True

    def __post_init__(self):
        if self.valuation_budget <= 0 or self.search_budget <= 0 or self.enum_cap <= 0:
            raise ValueError("budgets must be positive")


class UsageError(MSLError):
    pass


def config_from_args(args, environ=None):
    environ = os.environ if environ is None else environ
    valuations, search = DEFAULT_VALUATION_BUDGET, DEFAULT_SEARCH_BUDGET
    if environ.get("MSL_BUDGET"):
        try:
            valuations = search = int(environ["MSL_BUDGET"])
        except ValueError:
            raise UsageError("MSL_BUDGET must be an integer") from None
    if args.budget_valuations is not None:
        valuations = args.budget_valuations
    if args.budget_search is not None:
        search = args.budget_search
    try:
        return Config(valuations, search, args.enum_cap, args.seed, not args.no_deterministic)
    except ValueError as err:
        raise UsageError(str(err)) from None


# ---------------------------------------------------------------------------
# I/O helpers


def dumps(data):
    return json.dumps(data, sort_keys=True, separators=(",", ":"), ensure_ascii=False)


def read_json(path):
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except OSError as err:
        raise UsageError(f"cannot read {path}: {err.strerror}") from None
    except json.JSONDecodeError as err:
        raise UsageError(f"{path} is not valid JSON: {err}") from None


def load_frame(path):
    return frame_from_dict(read_json(path))


def load_domain(path, fr):
    if path is None:
        return DomainSet.empty(fr)
    return domainset_from_dict(read_json(path), fr)


def write_json(path, data):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(dumps(data) + "\n", encoding="utf-8")
    return path


def emit(args, data, lines=None):
    """Data as JSON on stdout or to ``-o``; ``lines`` is the human form of a report."""
    if args.output and not getattr(args, "output_is_dir", False):
        write_json(args.output, data)
        return
    if args.json or lines is None:
        print(dumps(data))
    else:
        for line in lines:
            print(line)


def _yes(flag):
    return "yes" if flag else "no"


# ---------------------------------------------------------------------------
# commands


def cmd_parse(args, cfg):
    if args.rule:
        rule = fm.parse_rule(args.text)
        text = fm.rule_to_text(rule)
        data = {"rule": text, "premises": len(rule.premises),
                "conclusions": len(rule.conclusions), "variables": sorted(rule.variables)}
    else:
        f = fm.parse(args.text)
        text = fm.to_text(f)
        data = {"formula": text, "size": fm.size(f), "variables": sorted(fm.variables(f))}
    emit(args, data, [text])
    return EXIT_OK


def cmd_frame_rank(args, cfg):
    emit(args, ranks_to_dict(load_frame(args.frame)))
    return EXIT_OK


def cmd_frame_check(args, cfg):
    fr = load_frame(args.frame)
    results = {}
    witness = None
    if args.formula is not None or args.rule is not None:
        target = fm.parse(args.formula) if args.formula is not None else fm.parse_rule(args.rule)
        witness = refuting_valuation(fr, target, cfg.valuation_budget)
        results["validates"] = witness is None
    if args.pretransitive:
        m, n = args.pretransitive
        results[f"pretransitive({m},{n})"] = is_pretransitive(fr, m, n)
    if args.cycle_free:
        results["cycle_free"] = is_cycle_free(fr)
    if args.rooted:
        results["rooted"] = is_rooted(fr)
    if not results:
        raise UsageError("frame check needs --formula, --rule, --pretransitive, --cycle-free "
                         "or --rooted")
    data = dict(results)
    if witness is not None:
        data["refuting_valuation"] = {k: sorted(fr.subset_labels(v)) for k, v in witness.items()}
    lines = [f"{k}: {_yes(v)}" for k, v in results.items()]
    if witness is not None:
        lines.append("refuting valuation: " + dumps(data["refuting_valuation"]))
    emit(args, data, lines)
    return EXIT_OK if all(results.values()) else EXIT_NEGATIVE


def cmd_frame_enum(args, cfg):
    frames = enumerate_frames(args.max_points, cycle_free=args.cycle_free, rooted=args.rooted,
                              pretransitive=tuple(args.pretransitive) if args.pretransitive else None,
                              cap=cfg.enum_cap)
    emit(args, [frame_to_dict(fr) for fr in frames])
    return EXIT_OK


def cmd_frame_upsets(args, cfg):
    fr = load_frame(args.frame)
    emit(args, [sorted(fr.subset_labels(u)) for u in upsets(fr)])
    return EXIT_OK


def cmd_dualize(args, cfg):
    data = read_json(args.input)
    if "points" in data:
        emit(args, algebra_to_dict(dual_algebra(frame_from_dict(data))))
    elif "atoms" in data:
        emit(args, frame_to_dict(dual_frame(algebra_from_dict(data))))
    else:
        raise UsageError("input must be a frame (points) or an algebra (atoms)")
    return EXIT_OK


def cmd_map_check(args, cfg):
    f = pointmap_from_dict(read_json(args.map))
    domain = load_domain(args.cdc, f.codomain)
    data = {"stable": is_stable(f), "surjective": is_surjective(f),
            "cdc": satisfies_cdc(f, domain), "pmorphism": is_pmorphism(f)}
    emit(args, data, [f"{k}: {_yes(v)}" for k, v in data.items()])
    ok = data["stable"] and data["surjective"] and data["cdc"]
    return EXIT_OK if ok else EXIT_NEGATIVE


def cmd_subdivide(args, cfg):
    from .subdivision import subdivide

    f = pointmap_from_dict(read_json(args.map))
    domain = load_domain(args.cdc, f.codomain)
    result = subdivide(f, domain)
    outputs = {
        "f_prime.json": pointmap_to_dict(result.f_prime),
        "g.json": pointmap_to_dict(result.g),
        "f_prime_frame.json": frame_to_dict(result.F_prime),
        "trace.json": [s.to_dict() for s in result.steps],
    }
    summary = {"F_prime": frame_to_dict(result.F_prime), "points": len(result.F_prime),
               "levels": result.N, "f_prime_is_pmorphism": is_pmorphism(result.f_prime)}
    if args.output:
        out = Path(args.output)
        for name, data in outputs.items():
            write_json(out / name, data)
        if args.plot:
            from .plotting import save_subdivision

            save_subdivision(result, f.domain, f.codomain, out / "subdivision.png")
    elif args.plot:
        raise UsageError("--plot needs -o DIR")
    lines = [f"F' has {len(result.F_prime)} points after {result.N} levels",
             f"f' is a p-morphism: {_yes(summary['f_prime_is_pmorphism'])}",
             "F': " + repr(result.F_prime)]
    if args.json or not args.output:
        print(dumps(summary) if args.json else "\n".join(lines))
    return EXIT_OK


def cmd_rule_gen(args, cfg):
    from .rules import spec_for_frame

    fr = load_frame(args.frame)
    domain = DomainSet.full(fr) if args.kind == "jankov" else load_domain(args.cdc, fr)
    kind = {"stable": "rho", "jankov": "rho"}.get(args.kind, args.kind)
    if args.kind == "stable":
        domain = DomainSet.empty(fr)
    spec = spec_for_frame(fr, domain, kind, args.m)
    produced = spec.generate()
    if isinstance(produced, fm.Rule):
        data = {"kind": args.kind, "rule": fm.rule_to_text(produced),
                "premises": [fm.to_text(g) for g in produced.premises],
                "conclusions": [fm.to_text(d) for d in produced.conclusions]}
        text = data["rule"]
    else:
        text = fm.to_text(produced)
        data = {"kind": args.kind, "formula": text}
    if args.output and not args.json:
        Path(args.output).write_text(text + "\n", encoding="utf-8")
    else:
        emit(args, data, [text])
    return EXIT_OK


def cmd_refute(args, cfg):
    """Semantic decision with a witness; ``--oracle`` adds the syntactic cross-check."""
    from .rules import (gen_epsilon, gen_gamma, gen_rho, refutes_epsilon_semantic,
                        refutes_gamma_semantic, refutes_rule_semantic, refutes_syntactic)

    X, F = load_frame(args.frame), load_frame(args.against)
    domain = load_domain(args.cdc, F)
    if args.oracle and args.kind == "gamma":
        # the formula only sees m+1 steps, so the two deciders match on pretransitive X only
        if args.any_upset:
            raise UsageError("--oracle compares against rooted upsets; drop --any-upset")
        if not is_pretransitive(X, args.m + 1, 1):
            raise UsageError(f"--oracle for gamma needs X to be ({args.m + 1},1)-pretransitive")
    data = {"kind": args.kind}
    if args.kind == "rho":
        w = refutes_rule_semantic(X, F, domain, cfg.search_budget)
    else:
        decide = refutes_gamma_semantic if args.kind == "gamma" else refutes_epsilon_semantic
        found = decide(X, F, domain, any_upset=args.any_upset, budget=cfg.search_budget)
        w = None if found is None else found[1]
        if found is not None:
            data["upset"] = sorted(X.subset_labels(found[0]))
    refuted = w is not None
    data["refuted"] = refuted
    if w is not None:
        data["witness"] = pointmap_to_dict(w)
    if args.oracle:
        alg = dual_algebra(F)
        if args.kind == "rho":
            target = gen_rho(alg, domain.sets)
        elif args.kind == "gamma":
            target = gen_gamma(alg, domain.sets, args.m)
        else:
            target = gen_epsilon(alg, domain.sets)
        data["syntactic"] = refutes_syntactic(X, target, cfg.valuation_budget)
        data["agree"] = data["syntactic"] == refuted
    if refuted:
        lines = ["witness: " + dumps(dict(sorted(w.as_labels().items())))]
        if "upset" in data:
            lines.append("upset: " + ", ".join(data["upset"]))
    else:
        lines = ["validates"]
    if args.oracle:
        lines.append("syntactic oracle agrees: " + _yes(data["agree"]))
    emit(args, data, lines)
    if args.oracle and not data["agree"]:
        print("msl: semantic and syntactic deciders disagree", file=sys.stderr)
        return EXIT_INTERNAL
    return EXIT_OK if refuted else EXIT_NEGATIVE


def _theta(text, close):
    formulas = [fm.parse(part) for part in text.split(",") if part.strip()]
    if close:
        closed = set()
        for f in formulas:
            closed |= fm.subformula_closure(f)
        return frozenset(closed)
    return frozenset(formulas)


def cmd_filtrate(args, cfg):
    from .filtration import (filtration_from_dict, greatest_filtration, least_filtration,
                             verify_definable_filtration)

    if args.action == "verify":
        if not (args.original and args.candidate):
            raise UsageError("filtrate verify needs --original and --candidate")
        original = model_from_dict(read_json(args.original))
        candidate = filtration_from_dict(read_json(args.candidate), original)
        verdict = verify_definable_filtration(original, candidate)
        data = {"ok": verdict.ok, "failed": list(verdict.failures), "details": list(verdict.details)}
        lines = ["definable filtration: " + _yes(verdict.ok)]
        lines += [f"failed {n}: {d}" for n, d in zip(verdict.failures, verdict.details)]
        emit(args, data, lines)
        return EXIT_OK if verdict else EXIT_NEGATIVE
    if not (args.model and args.theta):
        raise UsageError("filtrate needs --model and --theta")
    model = model_from_dict(read_json(args.model))
    build = least_filtration if args.kind == "least" else greatest_filtration
    result = build(model, _theta(args.theta, args.close))
    emit(args, result.to_dict(model))
    return EXIT_OK


def _logic_checks(args):
    checks = [fm.parse(t) for t in args.check_formula or []]
    checks += [tuple(p) for p in args.check_pretransitive or []]
    return tuple(checks)


def cmd_fmp_demo(args, cfg):
    from .subdivision import fmp_demo

    X, F = load_frame(args.space), load_frame(args.frame)
    domain = load_domain(args.cdc, F)
    report, result = fmp_demo(X, F, domain, _logic_checks(args), budget=cfg.search_budget,
                              valuation_budget=cfg.valuation_budget)
    if args.output:
        out = Path(args.output)
        write_json(out / "report.json", report)
        if result is not None:
            write_json(out / "f_prime_frame.json", report["F_prime"])
            if not args.no_plot:
                from .plotting import save_subdivision

                save_subdivision(result, X, F, out / "diagram.png")
    if result is None:
        lines = ["X validates the rule: there is nothing to subdivide"]
    else:
        lines = [f"F' has {len(result.F_prime)} points (bound {len(X) + len(F)})",
                 f"g . f' = f: {_yes(report['commutes'])}",
                 f"f' is a p-morphism: {_yes(report['f_prime_is_pmorphism'])}",
                 f"F' refutes the rule: {_yes(report['F_prime_refutes_rule'])}"]
        lines += [f"{c['check']}: X {_yes(c['X'])}, F' {_yes(c['F_prime'])}"
                  for c in report["logic_checks"]]
    if args.json:
        print(dumps(report))
    else:
        print("\n".join(lines))
    return EXIT_OK if result is not None else EXIT_NEGATIVE


def cmd_dichotomy(args, cfg):
    from .rules import splitting_dichotomy_check

    F = load_frame(args.frame)
    report = splitting_dichotomy_check(F, args.max_points, cfg.valuation_budget, cfg.enum_cap)
    data = {"frames": report["frames"],
            "violations": [frame_to_dict(r["frame"]) for r in report["violations"]],
            "rows": [{"frame": frame_to_dict(r["frame"]), "validates_epsilon": r["validates_epsilon"],
                      "witness": r["witness"]} for r in report["rows"]]}
    lines = [f"{report['frames']} frames checked, {len(report['violations'])} violations"]
    emit(args, data, lines)
    return EXIT_OK if not report["violations"] else EXIT_NEGATIVE


def cmd_selftest(args, cfg):
    from .checks import run_all

    results = run_all(seed=cfg.seed, budget=cfg.valuation_budget,
                      emit=None if args.json else print)
    if args.json:
        print(dumps([{"criterion": r.number, "name": r.name, "passed": r.passed,
                      "detail": r.detail, "failures": r.failures} for r in results]))
    return EXIT_OK if all(r.passed for r in results) else EXIT_NEGATIVE


# ---------------------------------------------------------------------------
# parser


def _common():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--budget-valuations", type=int, metavar="N")
    common.add_argument("--budget-search", type=int, metavar="N")
    common.add_argument("--enum-cap", type=int, default=DEFAULT_ENUM_CAP, metavar="N")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--no-deterministic", action="store_true")
    common.add_argument("-o", "--output", metavar="PATH")
    common.add_argument("--json", action="store_true", help="machine-readable report")
    return common


def build_parser():
    common = _common()
    parser = argparse.ArgumentParser(prog="msl", description="Finite modal spaces, stable "
                                     "canonical rules and the subdivision construction.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("parse", parents=[common], help="parse and pretty-print")
    p.add_argument("text")
    p.add_argument("--rule", action="store_true", help="read a rule 'g1, g2 / d1, d2'")
    p.set_defaults(func=cmd_parse)

    frame = sub.add_parser("frame", help="frame utilities")
    fsub = frame.add_subparsers(dest="frame_command", required=True)
    p = fsub.add_parser("rank", parents=[common])
    p.add_argument("frame")
    p.set_defaults(func=cmd_frame_rank)
    p = fsub.add_parser("check", parents=[common])
    p.add_argument("frame")
    p.add_argument("--formula")
    p.add_argument("--rule")
    p.add_argument("--pretransitive", nargs=2, type=int, metavar=("M", "N"))
    p.add_argument("--cycle-free", action="store_true")
    p.add_argument("--rooted", action="store_true")
    p.set_defaults(func=cmd_frame_check)
    p = fsub.add_parser("enum", parents=[common])
    p.add_argument("max_points", type=int)
    p.add_argument("--cycle-free", action="store_true")
    p.add_argument("--rooted", action="store_true")
    p.add_argument("--pretransitive", nargs=2, type=int, metavar=("M", "N"))
    p.set_defaults(func=cmd_frame_enum)
    p = fsub.add_parser("upsets", parents=[common])
    p.add_argument("frame")
    p.set_defaults(func=cmd_frame_upsets)

    p = sub.add_parser("dualize", parents=[common], help="frame <-> algebra")
    p.add_argument("input")
    p.set_defaults(func=cmd_dualize)

    mp = sub.add_parser("map", help="point maps")
    msub = mp.add_subparsers(dest="map_command", required=True)
    p = msub.add_parser("check", parents=[common])
    p.add_argument("--map", required=True)
    p.add_argument("--cdc")
    p.set_defaults(func=cmd_map_check)

    p = sub.add_parser("subdivide", parents=[common], help="run the subdivision construction")
    p.add_argument("--map", required=True)
    p.add_argument("--cdc")
    p.add_argument("--plot", action="store_true", help="also draw subdivision.png into -o DIR")
    p.set_defaults(func=cmd_subdivide, output_is_dir=True)

    rule = sub.add_parser("rule", help="canonical rules and formulas")
    rsub = rule.add_subparsers(dest="rule_command", required=True)
    p = rsub.add_parser("gen", parents=[common])
    p.add_argument("--frame", required=True)
    p.add_argument("--cdc")
    p.add_argument("--kind", choices=["rho", "stable", "jankov", "gamma", "epsilon"], default="rho")
    p.add_argument("--m", type=int, default=1)
    p.set_defaults(func=cmd_rule_gen)

    p = sub.add_parser("refute", parents=[common], help="does X refute the rule of F")
    p.add_argument("--frame", required=True, help="the space X")
    p.add_argument("--against", required=True, help="the finite frame F of the rule")
    p.add_argument("--cdc")
    p.add_argument("--kind", choices=["rho", "gamma", "epsilon"], default="rho")
    p.add_argument("--m", type=int, default=1)
    p.add_argument("--oracle", action="store_true", help="cross-check with the syntactic decider")
    p.add_argument("--any-upset", action="store_true")
    p.set_defaults(func=cmd_refute)

    p = sub.add_parser("filtrate", parents=[common], help="filtrations")
    p.add_argument("action", nargs="?", choices=["verify"])
    p.add_argument("--model")
    p.add_argument("--theta")
    p.add_argument("--kind", choices=["least", "greatest"], default="least")
    p.add_argument("--close", action="store_true", help="close theta under subformulas")
    p.add_argument("--original")
    p.add_argument("--candidate")
    p.set_defaults(func=cmd_filtrate)

    p = sub.add_parser("fmp-demo", parents=[common], help="refute, subdivide, transfer")
    p.add_argument("--space", required=True)
    p.add_argument("--frame", required=True)
    p.add_argument("--cdc")
    p.add_argument("--check-formula", action="append", metavar="FORMULA")
    p.add_argument("--check-pretransitive", action="append", nargs=2, type=int, metavar=("M", "N"))
    p.add_argument("--no-plot", action="store_true")
    p.set_defaults(func=cmd_fmp_demo, output_is_dir=True)

    p = sub.add_parser("dichotomy", parents=[common], help="splitting dichotomy check")
    p.add_argument("--frame", required=True)
    p.add_argument("--max-points", type=int, default=3)
    p.set_defaults(func=cmd_dichotomy)

    p = sub.add_parser("selftest", parents=[common], help="run the acceptance checks")
    p.set_defaults(func=cmd_selftest)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = config_from_args(args)
        return args.func(args, cfg)
    except BudgetExceeded as err:
        print(f"msl: budget exceeded: {err}", file=sys.stderr)
        return EXIT_BUDGET
    except InvariantViolation as err:
        print(f"msl: internal invariant violated: {err}", file=sys.stderr)
        return EXIT_INTERNAL
    except ParseError as err:
        print(f"msl: parse error: {err}", file=sys.stderr)
        return EXIT_USAGE
    except (MSLError, ValueError, KeyError, TypeError) as err:
        print(f"msl: {err}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
