"""Command-line front end. JSON goes to stdout, diagnostics to stderr."""
from __future__ import annotations

import argparse
import json
import sys

from . import __version__
from .classical_iso import PermGroup, isometry_group, mu_preserving_subgroup
from .errors import QisoError, ResourceBoundError, StructuralError
from .euclidean_embed import embed, embeddability
from .filtration import build_filtration, check_preserved_classical, check_preserved_quantum
from .hopf_finite import (GroupAction, build_hopf, check_isometry_formula, check_kac,
                          check_measure_preserving_action, to_rep)
from .magic_unitary import (DEFAULT_MAX_OPERATOR_DIM, DEFAULT_TOL, ISOMETRY_CONDITIONS, check_all,
                            quantum_certificate, rep_from_json)
from .metric_space import loads_space, parse_standard_name, require_valid, validate
from .report import corpus_table, dumps_canonical, report_bundle

EXIT_OK, EXIT_MALFORMED, EXIT_INVALID, EXIT_PRECONDITION, EXIT_RESOURCE = 0, 1, 2, 3, 4
# subcommands that list every group element refuse larger groups (exit 4)
GROUP_LIMIT = 100_000
# C(G) materializes N^2 coproduct terms and checks N^3 triples
HOPF_GROUP_LIMIT = 200


def _read_json_text(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    with open(path, encoding="utf-8") as fh:
        return fh.read()


def _load_space(args):
    if args.standard:
        return parse_standard_name(args.standard)
    if not args.input:
        raise StructuralError("an input file or --standard NAME is required")
    return loads_space(_read_json_text(args.input))


def cmd_validate(args):
    report = validate(_load_space(args))
    return report.to_json(), EXIT_OK if report.ok else EXIT_INVALID


def cmd_embed(args):
    space = _load_space(args)
    verdict = embeddability(space, args.basepoint)
    out = {"embeddable": verdict.embeddable, "rank": verdict.rank, "basepoint": args.basepoint}
    if verdict.embeddable:
        out["coords"] = embed(space, args.basepoint).coords.tolist()
    else:
        out["witness"] = verdict.witness.to_json()
    return out, EXIT_OK


def cmd_iso_group(args):
    space = _load_space(args)
    group = isometry_group(space, max_order=GROUP_LIMIT)
    return {
        "order": group.order,
        "elements": [list(g) for g in group],
        "generators": [list(g) for g in group.generators],
        "mu_preserving_order": mu_preserving_subgroup(group, space).order,
    }, EXIT_OK


def cmd_quantum_cert(args):
    space = _load_space(args)
    require_valid(space)
    cert = quantum_certificate(space)
    if cert is None:
        return {"certificate": False, "conditions": {}}, EXIT_OK
    return {
        "certificate": True,
        "twin_pairs": [list(p) for p in cert.pairs],
        "witness_norm": float(cert.witness_norm),
        "witness_norm_exact": cert.witness_norm,
        "conditions": check_all(cert.rep, space, args.tol, args.max_operator_dim).to_json(),
    }, EXIT_OK


def cmd_filtration(args):
    space = _load_space(args)
    emb = embed(space, args.basepoint)  # NotEmbeddableError -> exit 3
    filt = build_filtration(emb)
    group = isometry_group(space, max_order=GROUP_LIMIT)
    mu_group = mu_preserving_subgroup(group, space)
    classical = {str(list(g)): check_preserved_classical(g, filt, emb).deviation for g in mu_group}
    cert = quantum_certificate(space)
    return {
        "dims": filt.dims,
        "degrees": list(filt.degrees),
        "bases": [b.T.tolist() for b in filt.levels],
        "preserved": {
            "classical": classical,
            "classical_max_deviation": max(classical.values()),
            "quantum_max_deviation": check_preserved_quantum(cert.rep, filt, emb, args.tol).deviation
            if cert else None,
            "tol": args.tol,
        },
    }, EXIT_OK


def _select_group(spec: str, space) -> PermGroup:
    if spec == "full":
        return isometry_group(space, max_order=HOPF_GROUP_LIMIT)
    if spec == "mu-preserving":
        return mu_preserving_subgroup(isometry_group(space, max_order=GROUP_LIMIT), space)
    try:
        gens = json.loads(spec)
    except json.JSONDecodeError as exc:
        raise StructuralError(f"--group must be full, mu-preserving or a JSON list of permutations: {exc}")
    return PermGroup.generate(space.n, gens)


def cmd_check_action(args):
    space = _load_space(args)
    require_valid(space)
    if args.rep:
        rep = rep_from_json(json.loads(_read_json_text(args.rep)))
        return {"conditions": check_all(rep, space, args.tol, args.max_operator_dim).to_json()}, EXIT_OK
    group = _select_group(args.group, space)
    if group.order > HOPF_GROUP_LIMIT:
        raise ResourceBoundError(f"group of order {group.order} exceeds the C(G) limit {HOPF_GROUP_LIMIT}")
    hopf = build_hopf(group)
    kac = check_kac(hopf)
    action = GroupAction(hopf, space.n)
    formula = check_isometry_formula(action, space)
    reps = {}
    for g in group:
        r = check_all(to_rep(action, g), space, args.tol, args.max_operator_dim)
        reps[str(list(g))] = {"agree": r.conditions_agree,
                              **{c: r.isometry_checks()[c].ok for c in ISOMETRY_CONDITIONS}}
    return {
        "group_order": group.order,
        "hopf_axioms": hopf.axioms.to_json(),
        "kac": {"tracial": kac.tracial, "antipode_involutive": kac.antipode_involutive,
                "biconditional": kac.biconditional},
        "action_axioms": action.verify().to_json(),
        "isometry_formula": {"deviation": formula.deviation, "exact_zero": formula.exact_zero,
                             "classical_identity_deviation": formula.classical_identity_deviation,
                             "triples": formula.triples},
        "measure_preserving_deviation": check_measure_preserving_action(action, space.measure),
        "reps": reps,
        "tol": args.tol,
    }, EXIT_OK


def cmd_report(args):
    if args.corpus:
        return corpus_table(args.tol, args.max_operator_dim), EXIT_OK
    space = _load_space(args)
    bundle = report_bundle(space, args.tol, args.max_operator_dim, args.basepoint)
    return bundle, EXIT_OK if bundle["validation"]["valid"] else EXIT_INVALID


COMMANDS = {
    "validate": cmd_validate,
    "embed": cmd_embed,
    "iso-group": cmd_iso_group,
    "quantum-cert": cmd_quantum_cert,
    "filtration": cmd_filtration,
    "check-action": cmd_check_action,
    "report": cmd_report,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("input", nargs="?", help="space JSON file ('-' for stdin)")
    common.add_argument("--standard", metavar="NAME", help="built-in space, e.g. square, simplex(3), rectangle(1,4)")
    common.add_argument("--tol", type=float, default=DEFAULT_TOL)
    common.add_argument("--max-operator-dim", type=int, default=DEFAULT_MAX_OPERATOR_DIM)
    common.add_argument("--basepoint", type=int, default=0)

    parser = argparse.ArgumentParser(prog="qiso", description=__doc__)
    parser.add_argument("--version", action="version", version=f"qiso {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name, parents=[common])
        if name == "check-action":
            p.add_argument("--rep", help="magic-unitary rep JSON file")
            p.add_argument("--group", default="full",
                           help="full | mu-preserving | JSON list of generating permutations")
        if name == "report":
            p.add_argument("--corpus", action="store_true", help="run every built-in standard space")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        payload, code = COMMANDS[args.command](args)
    except json.JSONDecodeError as exc:
        print(f"error: malformed JSON at line {exc.lineno} column {exc.colno} (char {exc.pos}): {exc.msg}",
              file=sys.stderr)
        return EXIT_MALFORMED
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_MALFORMED
    except QisoError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code
    sys.stdout.write(dumps_canonical(payload) + "\n")
    return code


if __name__ == "__main__":
    sys.exit(main())
