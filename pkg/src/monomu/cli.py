"""Command-line interface.

Exit codes: 0 for SAT / holds / accepted, 1 for UNSAT / fails / rejected,
2 for input errors (I/O, parse, validation, malformed JSON) and 3 when a
resource cap is hit.
"""

from __future__ import annotations

import argparse
import json
import sys

from monomu.certificate import Certificate, CertificateError, verify_certificate
from monomu.formula import TOP, FormulaError
from monomu.frontends import translate
from monomu.game import DEFAULT_NODE_CAP, ResourceLimit, WordBoundExceeded
from monomu.parser import parse
from monomu.semantics import ModelError, NeighbourhoodModel, extension, is_global_model
from monomu.solver import decide

EXIT_OK, EXIT_NO, EXIT_INPUT, EXIT_RESOURCE = 0, 1, 2, 3


class InputError(Exception):
    pass


def _read(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    try:
        with open(path, encoding="utf-8") as fh:
            return fh.read()
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from None


def _formula_arg(text: str, is_file: bool):
    return parse(_read(text) if is_file else text)


def _write(path: str | None, text: str) -> None:
    if path is None or path == "-":
        print(text)
        return
    try:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
    except OSError as exc:
        raise InputError(f"cannot write {path}: {exc.strerror}") from None


def _emit(args, obj: dict, line: str) -> None:
    if args.seed is not None:
        obj["seed"] = args.seed
    print(json.dumps(obj, sort_keys=True) if args.json else line)


def _certificate_obj(res) -> dict:
    if res.parts:
        return {"guess": list(res.guess),
                "parts": [p.certificate.to_json_obj() for p in res.parts]}
    return res.certificate.to_json_obj()


def _solve(args):
    psi = _formula_arg(args.file, True)
    glob = _formula_arg(args.global_, True) if args.global_ else TOP
    return decide(psi, glob, node_cap=args.node_cap)


def cmd_sat(args) -> int:
    res = _solve(args)
    verdict = "SAT" if res else "UNSAT"
    obj = {"verdict": verdict, "closure_size": res.n,
           "eloise_nodes": res.eloise_nodes, "abelard_nodes": res.abelard_nodes}
    if res and args.certificate:
        _write(args.certificate, json.dumps(_certificate_obj(res), indent=2))
    if res and getattr(args, "model_out", None) is not None:
        model = res.model()
        obj["states"] = model.size
        if args.model_out == "-":
            obj["model"] = model.to_json_obj()
        else:
            _write(args.model_out, model.to_json(indent=2))
    line = verdict
    if "model" in obj and not args.json:
        line += "\n" + json.dumps(obj["model"], indent=2)
    _emit(args, obj, line)
    return EXIT_OK if res else EXIT_NO


def cmd_check(args) -> int:
    try:
        model = NeighbourhoodModel.from_json(_read(args.model))
    except json.JSONDecodeError as exc:
        raise InputError(f"{args.model}: invalid JSON: {exc}") from None
    f = _formula_arg(args.formula, args.formula_file)
    if f.free:
        raise InputError(f"formula has free variables {sorted(f.free)}")
    ext = extension(model, f)
    states = [s for i, s in enumerate(model.states) if ext >> i & 1]
    if args.state is not None:
        if args.state not in model.index:
            raise InputError(f"unknown state {args.state!r}")
        ok = bool(ext >> model.index[args.state] & 1)
    elif args.everywhere:
        ok = is_global_model(model, f)
    else:
        ok = bool(ext)
    _emit(args, {"holds": ok, "extension": states},
          ("true" if ok else "false") + "\n" + " ".join(states))
    return EXIT_OK if ok else EXIT_NO


def cmd_certify(args) -> int:
    try:
        obj = json.loads(_read(args.cert))
    except json.JSONDecodeError as exc:
        raise InputError(f"{args.cert}: invalid JSON: {exc}") from None
    rho1 = _formula_arg(args.formula, args.formula_file) if args.formula else None
    rho0 = _formula_arg(args.global_, True) if args.global_ else None
    parts = obj["parts"] if isinstance(obj, dict) and "parts" in obj else [obj]
    if rho1 is not None and len(parts) != 1:
        raise InputError("--formula applies only to single certificates")
    results = []
    for part in parts:
        try:
            cert = Certificate.from_json_obj(part)
        except CertificateError as exc:
            results.append(("malformed", str(exc)))
            continue
        ver = verify_certificate(cert, rho1, rho0 if rho1 is not None else None)
        results.append((ver.code, ver.detail) if not ver else (None, ""))
    bad = [r for r in results if r[0] is not None]
    if bad:
        code, detail = bad[0]
        _emit(args, {"accepted": False, "code": code, "detail": detail},
              f"rejected ({code}): {detail}")
        return EXIT_NO
    _emit(args, {"accepted": True}, "accepted")
    return EXIT_OK


def cmd_translate(args) -> int:
    text = _read(args.input) if args.file else args.input
    f = translate(text, args.dialect)
    _emit(args, {"formula": str(f)}, str(f))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--json", action="store_true", help="machine-readable output")
    common.add_argument("--seed", type=int, help="recorded in JSON output; the solver is deterministic")
    common.add_argument("--node-cap", type=int, default=DEFAULT_NODE_CAP,
                        help="maximum number of game nodes (default %(default)s)")

    ap = argparse.ArgumentParser(prog="monomu",
                                 description="Satisfiability for the monotone mu-calculus.")
    sub = ap.add_subparsers(dest="command", required=True)

    for name, hlp in (("sat", "decide satisfiability"),
                      ("model", "decide satisfiability and print a model")):
        p = sub.add_parser(name, parents=[common], help=hlp)
        p.add_argument("file", help="formula file ('-' for stdin)")
        p.add_argument("--global", dest="global_", metavar="FILE",
                       help="formula required to hold in every state")
        p.add_argument("--certificate", metavar="OUT",
                       help="write the winning-strategy certificate as JSON")
        if name == "model":
            p.add_argument("--out", dest="model_out", default="-",
                           help="model JSON destination (default stdout)")
        p.set_defaults(func=cmd_sat)

    p = sub.add_parser("check", parents=[common], help="evaluate a formula on a model")
    p.add_argument("--model", required=True, help="model JSON file")
    p.add_argument("--formula", required=True, help="formula text")
    p.add_argument("--formula-file", action="store_true", help="read --formula from a file")
    g = p.add_mutually_exclusive_group()
    g.add_argument("--state", help="check at this state")
    g.add_argument("--everywhere", action="store_true", help="check at every state")
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("certify", parents=[common], help="verify a certificate")
    p.add_argument("--cert", required=True, help="certificate JSON file")
    p.add_argument("--formula", help="check against this formula instead of the recorded one")
    p.add_argument("--formula-file", action="store_true", help="read --formula from a file")
    p.add_argument("--global", dest="global_", metavar="FILE", help="global assumption file")
    p.set_defaults(func=cmd_certify)

    p = sub.add_parser("translate", parents=[common],
                       help="translate game logic or CPDL to the mu-calculus")
    p.add_argument("input", help="formula text")
    p.add_argument("--from", dest="dialect", choices=("gamelogic", "cpdl"),
                   default="gamelogic")
    p.add_argument("--file", action="store_true", help="read the input from a file")
    p.set_defaults(func=cmd_translate)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ResourceLimit, WordBoundExceeded) as exc:
        print(f"monomu: resource limit: {exc}", file=sys.stderr)
        return EXIT_RESOURCE
    except (InputError, FormulaError, ModelError, CertificateError) as exc:
        print(f"monomu: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
