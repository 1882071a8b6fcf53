"""Batch command line: JSON problem files in, deterministic JSON reports out.

Exit codes: 0 success or true verdict, 1 false verdict, 2 domain error
(non-composable, degenerate, not orthogonal, ...), 3 malformed input.
"""

import argparse
import json
import sys
import time

from . import bvintegral as bi
from . import quantum as qu
from . import serialization as ser
from . import symplectic as sy
from .densities import LinDensity
from .errors import DomainError, MalformedInput
from .verify import SUITES, run_suite

SERIES_COMMANDS = {"integrate", "transfer", "check-qme", "check-relation"}
VERSION = 1


def _require(payload, *keys):
    missing = [k for k in keys if k not in payload]
    if missing:
        raise MalformedInput(f"missing field(s): {', '.join(missing)}")


def _space_or_relation(payload):
    if "relation" in payload:
        L = ser.decode_relation(payload["relation"])
        return L.graph, L.ambient
    _require(payload, "space", "subspace")
    V = ser.decode_symp(payload["space"])
    return ser.decode_subspace(payload["subspace"], V.space), V


def cmd_classify(payload, args):
    W, V = _space_or_relation(payload)
    props = sy.properties(W, V)
    return {"class": sy.classify(W, V), "properties": sorted(props)}, 0


def cmd_factorize(payload, args):
    _require(payload, "relation")
    c = sy.factorize(ser.decode_relation(payload["relation"]))
    return {"cospan": ser.encode_cospan(c)}, 0


def cmd_compose(payload, args):
    if "generalized_lagrangians" in payload:
        if args.max_weight is None:
            raise MalformedInput("--max-weight is required to compose generalized Lagrangians")
        items = [ser.decode_genlag(g, args.max_weight) for g in payload["generalized_lagrangians"]]
        if not items:
            raise MalformedInput("nothing to compose")
        G = items[0]
        for H in items[1:]:
            G = qu.compose_genlag(G, H)
        return {"generalized_lagrangian": ser.encode_genlag(G)}, 0
    _require(payload, "relations")
    rels = [ser.decode_relation(r) for r in payload["relations"]]
    if not rels:
        raise MalformedInput("nothing to compose")
    L = rels[0]
    for M in rels[1:]:
        L = sy.compose(L, M)
    return {"relation": ser.encode_relation(L), "class": L.classify()}, 0


def _dg(payload):
    V = ser.decode_symp(payload["space"])
    s = ser.decode_function(payload["s_free"], V.space)
    return bi.DgOddSympSpace(V, s)


def cmd_integrate(payload, args):
    _require(payload, "space", "s_free", "f")
    dg = _dg(payload)
    V = dg.space
    f = ser.decode_function(payload["f"], V.space, args.max_weight)
    rho = LinDensity(V.space, ser.decode_prefactor(payload["rho"])) if "rho" in payload else None
    if "lagrangian" in payload:
        L = ser.decode_subspace(payload["lagrangian"], V.space)
        r = bi.bv_integral(f, L, dg, rho)
        return {"series": ser.encode_function(r.series), "prefactor": ser.encode_prefactor(r.prefactor)}, 0
    if "reduction" in payload:
        L = ser.decode_relation(payload["reduction"])
        r = bi.fiber_integral(f, L, dg, rho)
        return {
            "function": ser.encode_function(r.function),
            "density": ser.encode_prefactor(r.density.coefficient),
            "s_free": ser.encode_function(r.s_free),
            "space": ser.encode_symp(L.target),
        }, 0
    raise MalformedInput("integrate needs a 'lagrangian' or a 'reduction'")


def cmd_transfer(payload, args):
    _require(payload, "action", "reduction")
    S = ser.decode_action(payload["action"], args.max_weight)
    L = ser.decode_relation(payload["reduction"])
    E = qu.effective_action(S, L)
    return {
        "action": ser.encode_action(E.action),
        "density": ser.encode_prefactor(E.density.coefficient),
        "vacuum": ser.encode_function(E.vacuum),
    }, 0


def cmd_check_qme(payload, args):
    _require(payload, "action")
    S = ser.decode_action(payload["action"], args.max_weight)
    r = qu.check_qme(S, payload.get("form", "decomposed"))
    return {"holds": r.holds, "residual": ser.encode_function(r.residual)}, 0 if r.holds else 1


def cmd_check_relation(payload, args):
    _require(payload, "source_action", "target_action", "relation")
    SU = ser.decode_action(payload["source_action"], args.max_weight)
    SV = ser.decode_action(payload["target_action"], args.max_weight)
    L = ser.decode_relation(payload["relation"])
    cert = qu.check_relation(SU, SV, L)
    return {"certificate": ser.encode_certificate(cert)}, 0 if cert.verdict else 1


COMMANDS = {
    "classify": cmd_classify,
    "factorize": cmd_factorize,
    "compose": cmd_compose,
    "integrate": cmd_integrate,
    "transfer": cmd_transfer,
    "check-qme": cmd_check_qme,
    "check-relation": cmd_check_relation,
}


def _read(path):
    try:
        text = sys.stdin.read() if path == "-" else open(path, encoding="utf-8").read()
    except OSError as e:
        raise MalformedInput(f"cannot read {path}: {e.strerror}") from None
    try:
        data = json.loads(text, parse_float=_no_float)
    except json.JSONDecodeError as e:
        raise MalformedInput(f"invalid JSON: {e}") from None
    if not isinstance(data, dict):
        raise MalformedInput("problem file must be a JSON object")
    v = data.get("version", VERSION)
    if v != VERSION:
        raise MalformedInput(f"unsupported version {v!r}")
    return data


def _no_float(s):
    raise MalformedInput(f"floating point number {s} is not allowed; use \"p/q\" strings")


def _error_payload(e):
    chain = [c.__name__ for c in type(e).__mro__ if issubclass(c, (DomainError, MalformedInput))]
    return {"error": chain[0], "is_a": chain[1:], "message": str(e)}


class _Parser(argparse.ArgumentParser):
    # usage errors are malformed input (exit 3), not argparse's default 2
    def error(self, message):
        raise MalformedInput(f"{self.prog}: {message}")


def build_parser():
    p = _Parser(prog="bvcat", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name in COMMANDS:
        c = sub.add_parser(name)
        c.add_argument("file", help="problem file, or - for stdin")
        _common(c)
    v = sub.add_parser("verify")
    v.add_argument("--suite", required=True, choices=sorted(SUITES))
    v.add_argument("--instances", type=int, default=10)
    _common(v)
    return p


def _common(c):
    c.add_argument("--max-weight", type=int, dest="max_weight")
    c.add_argument("--seed", type=int, default=0)
    c.add_argument("--out")
    c.add_argument("--timing", action="store_true", help="add wall-clock time (breaks byte determinism)")


def run(argv=None):
    """Execute one command; returns ``(report, exit_code, args)``."""
    try:
        args = build_parser().parse_args(argv)
    except MalformedInput as e:
        return {"command": None, "result": _error_payload(e), "exit_code": 3}, 3, None
    start = time.perf_counter()
    report = {"command": args.command}
    try:
        if args.max_weight is not None and args.max_weight < 0:
            raise MalformedInput("--max-weight must be non-negative")
        if args.command == "verify":
            result = run_suite(args.suite, args.seed, args.instances)
            code = 0 if result["ok"] else 1
        else:
            if args.command in SERIES_COMMANDS and args.max_weight is None:
                raise MalformedInput(f"--max-weight is required for {args.command}")
            payload = _read(args.file)
            report["max_weight"] = args.max_weight
            result, code = COMMANDS[args.command](payload, args)
        report["result"] = result
    except MalformedInput as e:
        report["result"], code = _error_payload(e), 3
    except DomainError as e:
        report["result"], code = _error_payload(e), 2
    if args.timing:
        report["seconds"] = round(time.perf_counter() - start, 3)
    report["exit_code"] = code
    return report, code, args


def main(argv=None):
    report, code, args = run(argv)
    text = ser.dumps(report)
    if args is not None and args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
