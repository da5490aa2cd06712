"""Command-line front end.  Every subcommand prints one JSON report (schema "1").

Exit codes: 0 for a definitive result, 2 when the solver ran out of budget,
1 for malformed input.
"""

from __future__ import annotations

import argparse
import hashlib
import itertools
import json
import sys
from fractions import Fraction
from typing import Optional, Sequence

from . import __version__
from .approx import (
    ApproxParams,
    SolverUnknown,
    derive_profile_f,
    in_window_tuples,
    profile_check,
    scan_family,
    trasdim_ord,
)
from .metric import MetricError, build, is_zero_dim, scale_components
from .ordinal import OrdinalError
from .setfamily import FamilyError, SetFamily, chain_witness, derive, ord_of
from .solver import DEFAULT_BUDGET, Decomposer, Status
from .strategy import APDProfile, StrategyError, check_certificate, strategy_from_json

SCHEMA = "1"

FORMATS = """\
input formats (files, '-' for stdin, or inline JSON starting with '{'):
  family    {"ground": [1,2,3], "members": [[1],[2],[1,2]]}   ("ground": 5 means 1..5)
            {"oracle": "card_le_min", "truncation": 10}         (also "card_le_const_k" with "params": {"k": 2})
  space     {"kind": "path", "size": 60}
            {"kind": "grid", "size": 12, "dim": 2, "norm": "linf"}
            {"kind": "matrix", "matrix": [[0, 1], [1, 0]]}      (entries may be "INF" or "3/2")
            {"kind": "graph", "n": 4, "edges": [[0, 1], [1, 2, 5]]}
            {"kind": "disjoint_union", "parts": [<space>, <space>]}
            {"kind": "random", "n": 20, "seed": 7}
  request   {"space": <space>, "scales": [2, 3, 4], "B": 12, "op": "trasdim"}
  profile   {"alpha0": 1, "rules": [{"type": "table", "values": {"2": 1, "3": 2}, "hold": true}]}
  strategy  {"m": 1, "start": 2, "rules": [{"type": "affine", "a": 1, "b": 0}]}
            {"m": 1, "start": 1, "type": "table", "entries": [{"prefix": [[1]], "size": 2}]}
scales: "2..6" or "2,3,4"; tuples: "2,3;3,4"
"""


class InputError(ValueError):
    pass


def _load(text: str, what: str):
    if text == "-":
        raw, where = sys.stdin.read(), "<stdin>"
    elif text.lstrip().startswith("{"):
        raw, where = text, "<inline>"
    else:
        try:
            with open(text, encoding="utf-8") as fh:
                raw = fh.read()
        except OSError as exc:
            raise InputError(f"cannot read {what} {text!r}: {exc.strerror}") from None
        where = text
    try:
        return json.loads(raw)
    except json.JSONDecodeError as exc:
        raise InputError(f"{where}: line {exc.lineno} column {exc.colno}: {exc.msg}") from None


def _json_default(v):
    if isinstance(v, Fraction):
        return str(v)
    raise TypeError(f"cannot serialise {type(v).__name__}")


def _canonical(doc) -> str:
    return json.dumps(doc, sort_keys=True, separators=(",", ":"), default=_json_default)


def _digest(doc) -> str:
    return "sha256:" + hashlib.sha256(_canonical(doc).encode()).hexdigest()


def parse_scales(text: str) -> list[int]:
    text = text.strip()
    try:
        if ".." in text:
            lo, hi = text.split("..")
            out = list(range(int(lo), int(hi) + 1))
        else:
            out = [int(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise InputError(f"cannot read scales {text!r}; use '2..6' or '2,3,4'") from None
    if not out:
        raise InputError(f"empty scale list {text!r}")
    return out


def parse_tuples(text: str) -> list[tuple[int, ...]]:
    try:
        return [tuple(int(v) for v in part.split(",")) for part in text.split(";") if part.strip()]
    except ValueError:
        raise InputError(f"cannot read tuples {text!r}; use '2,3;3,4'") from None


def _family(doc, at: str = "$") -> SetFamily:
    if not isinstance(doc, dict):
        raise InputError(f"{at}: a family document must be an object")
    try:
        if "oracle" in doc:
            return SetFamily.from_oracle(doc["oracle"], int(doc["truncation"]), **doc.get("params", {}))
        return SetFamily.explicit(doc["ground"], doc["members"])
    except KeyError as exc:
        raise InputError(f"{at}: missing field {exc.args[0]!r}") from None
    except (FamilyError, TypeError, ValueError) as exc:
        raise InputError(f"{at}: {exc}") from None


def _space_request(args) -> tuple[dict, dict]:
    """The space document and request fields; flags override the request."""
    doc = _load(args.input, "input")
    if not isinstance(doc, dict):
        raise InputError("$: expected a JSON object")
    if "space" in doc:
        request, space_doc, at = doc, doc["space"], "$.space"
        if "op" in doc and doc["op"] != args.command:
            raise InputError(f"$.op: request is for {doc['op']!r}, not {args.command!r}")
    else:
        request, space_doc, at = {}, doc, "$"
    return request, (space_doc, at)


def _space(space_doc, at: str):
    try:
        return build(space_doc)
    except KeyError as exc:
        raise InputError(f"{at}: missing field {exc.args[0]!r}") from None
    except (MetricError, TypeError, ValueError, AttributeError) as exc:
        raise InputError(f"{at}: {exc}") from None


def _params(args, request: dict) -> ApproxParams:
    scales = parse_scales(args.scales) if args.scales else request.get("scales")
    bound = args.bound if args.bound is not None else request.get("B")
    budget = args.budget if args.budget is not None else request.get("budget", DEFAULT_BUDGET)
    if scales is None:
        raise InputError("no scale window: pass --scales or put \"scales\" in the request")
    if bound is None:
        raise InputError("no mesh bound: pass --bound or put \"B\" in the request")
    if isinstance(scales, str):
        scales = parse_scales(scales)
    try:
        return ApproxParams(tuple(scales), bound, int(budget))
    except (TypeError, ValueError) as exc:
        raise InputError(f"$.scales: {exc}") from None


def _number(text: str):
    try:
        v = Fraction(text)
    except ValueError:
        raise InputError(f"not a number: {text!r}") from None
    return v.numerator if v.denominator == 1 else v


def _json_number(v):
    return v if isinstance(v, int) else str(v)


# subcommands; each returns (params, truncation, result, stats, definitive, input doc)


def cmd_ord(args):
    doc = _load(args.input, "family")
    F = _family(doc)
    truncated = not F.is_explicit
    value = ord_of(F.materialize())
    result = {"value": str(value), "int": int(value), "members": len(F.materialize().members)}
    return {}, {"ground": sorted(F.ground), "truncated": truncated}, result, {}, True, doc


def cmd_derive(args):
    doc = _load(args.input, "family")
    F = _family(doc).materialize()
    sigma = parse_scales(args.sigma) if args.sigma else []
    try:
        D = derive(F, sigma)
    except FamilyError as exc:
        raise InputError(str(exc)) from None
    result = {"sigma": sorted(sigma), "family": D.to_json(), "ord": str(ord_of(D))}
    return {"sigma": sorted(sigma)}, {"ground": sorted(F.ground)}, result, {}, True, doc


def cmd_chain(args):
    doc = _load(args.input, "family")
    F = _family(doc).materialize()
    try:
        chain = chain_witness(F, args.k)
    except FamilyError as exc:
        raise InputError(str(exc)) from None
    result = {"k": args.k, "found": chain is not None, "chain": list(chain) if chain else None}
    return {"k": args.k}, {"ground": sorted(F.ground)}, result, {}, True, doc


def cmd_components(args):
    request, (space_doc, at) = _space_request(args)
    X = _space(space_doc, at)
    r = _number(args.scale)
    part = scale_components(X, None, r)
    result = {"scale": _json_number(r), "count": len(part.blocks), "components": part.to_json(X)}
    if args.bound is not None:
        result["zero_dim"] = is_zero_dim(X, None, r, args.bound)
    return {"scale": _json_number(r)}, {"points": len(X)}, result, {}, True, space_doc


def cmd_decompose(args):
    request, (space_doc, at) = _space_request(args)
    X = _space(space_doc, at)
    slots = parse_scales(args.slots) if args.slots else request.get("slots")
    bound = args.bound if args.bound is not None else request.get("B")
    if not slots or bound is None:
        raise InputError("decompose needs --slots and --bound")
    budget = args.budget if args.budget is not None else DEFAULT_BUDGET
    res = Decomposer(X, bound, budget).solve(slots)
    params = {"slots": list(slots), "B": bound, "budget": budget}
    doc = res.to_json(X)
    stats = {"nodes": doc.pop("nodes"), "warm_start": doc.pop("warm_start")}
    return params, {"points": len(X), "B": bound}, doc, stats, res.status is not Status.UNKNOWN, space_doc


def _approx_common(args):
    request, (space_doc, at) = _space_request(args)
    X = _space(space_doc, at)
    params = _params(args, request)
    # kept for the report when the solver gives up midway
    args.context = (params.to_json(), _truncation(params, X), space_doc)
    return X, params, Decomposer(X, params.bound, params.budget), space_doc


def _truncation(params: ApproxParams, X) -> dict:
    return {"scales": list(params.window), "B": params.bound, "points": len(X)}


def _stats(dec: Decomposer) -> dict:
    return {"solver_calls": dec.calls, "nodes": dec.total_nodes}


def cmd_family(args):
    X, params, dec, space_doc = _approx_common(args)
    scan = scan_family(X, params, dec)
    result = {"family": scan.family.to_json(), "ord": int(ord_of(scan.family))}
    return params.to_json(), _truncation(params, X), result, _stats(dec), True, space_doc


def cmd_trasdim(args):
    X, params, dec, space_doc = _approx_common(args)
    rep = trasdim_ord(X, params, dec)
    result = {"ord": rep.ord, "family": rep.family.to_json(),
              "note": "r-disjoint covers and scale-r-dimension-0 covers give the same family at fixed B"}
    return params.to_json(), _truncation(params, X), result, _stats(dec), True, space_doc


def cmd_derive_f(args):
    X, params, dec, space_doc = _approx_common(args)
    table = derive_profile_f(X, args.n, params, dec)
    result = table.to_json()
    result["in_window_tuples"] = [list(t) for t in in_window_tuples(table)]
    p = params.to_json()
    p["n"] = args.n
    return p, _truncation(params, X), result, _stats(dec), True, space_doc


def cmd_profile_check(args):
    X, params, dec, space_doc = _approx_common(args)
    if args.profile:
        prof_doc = _load(args.profile, "profile")
        try:
            profile = APDProfile.from_json(prof_doc)
        except (KeyError, TypeError, ValueError) as exc:
            raise InputError(f"profile: {exc}") from None
    else:
        table = derive_profile_f(X, args.n, params, dec)
        profile = table.profile()
    if args.tuples:
        tuples = parse_tuples(args.tuples)
    else:
        tuples = _profile_tuples(profile, params.window)
    try:
        rep = profile_check(X, profile, tuples, params.bound, params.budget, dec)
    except StrategyError as exc:
        raise InputError(str(exc)) from None
    return params.to_json(), _truncation(params, X), rep.to_json(X), _stats(dec), True, space_doc


def _profile_tuples(profile: APDProfile, window) -> list[tuple]:
    """All non-decreasing window tuples on which every rule is defined."""
    out = []
    for t in _nondecreasing(sorted(window), profile.m + 1):
        try:
            profile.slot_counts(t)
        except StrategyError:
            continue
        out.append(t)
    return out


def _nondecreasing(values, k):
    return list(itertools.combinations_with_replacement(values, k))


def cmd_strategy_check(args):
    sdoc = _load(args.strategy, "strategy")
    try:
        S = strategy_from_json(sdoc)
    except (KeyError, TypeError, ValueError) as exc:
        raise InputError(f"strategy: {exc}") from None
    fdoc = _load(args.input, "family")
    F = _family(fdoc)
    caps = {"max_truncation": args.max_truncation, "max_rounds": args.max_rounds}
    try:
        rep = check_certificate(S, F, args.truncation, **caps)
    except StrategyError as exc:
        raise InputError(str(exc)) from None
    params = {"strategy": S.to_json(), "T": args.truncation}
    return params, {"labels": list(rep.truncation)}, rep.to_json(), {}, True, {"family": fdoc, "strategy": sdoc}


COMMANDS = {
    "ord": (cmd_ord, "Ord of a family (oracle families at their truncation)"),
    "derive": (cmd_derive, "derived family F^sigma"),
    "chain": (cmd_chain, "chain witness of length k in an inclusive family"),
    "components": (cmd_components, "scale-r-components of a space"),
    "decompose": (cmd_decompose, "decompose a space into scale slots at bound B"),
    "family": (cmd_family, "truncated family of undecomposable scale sets"),
    "trasdim": (cmd_trasdim, "Ord of the truncated family"),
    "derive-f": (cmd_derive_f, "f(k) = Ord M^{k..k+n} + 1 table"),
    "profile-check": (cmd_profile_check, "check an APD profile on scale tuples"),
    "strategy-check": (cmd_strategy_check, "check a strategy certificate against a family"),
}


def make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="trasdim",
        description="Exact truncated computations for Ord and transfinite asymptotic dimension.",
        epilog=FORMATS,
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, metavar="command")
    for name, (_, help_text) in COMMANDS.items():
        p = sub.add_parser(name, help=help_text, description=help_text, epilog=FORMATS,
                           formatter_class=argparse.RawDescriptionHelpFormatter)
        p.add_argument("--input", required=True, help="family, space or request document")
        p.add_argument("--format", choices=("json", "table"), default="json")
        p.add_argument("--seed", type=int, default=None, help="seed for generated (random) spaces")
        p.add_argument("--scales", help="scale window, '2..6' or '2,3,4'")
        p.add_argument("--bound", type=_number, default=None, help="mesh bound B")
        p.add_argument("--budget", type=int, default=None, help="solver node budget")
        p.add_argument("--truncation", type=int, default=None, help="truncation T (labels 1..T)")
        if name == "derive":
            p.add_argument("--sigma", help="the set sigma, e.g. '1,2'")
        if name == "chain":
            p.add_argument("--k", type=int, required=True)
        if name == "components":
            p.add_argument("--scale", required=True)
        if name == "decompose":
            p.add_argument("--slots", help="slot scales, e.g. '2,3' (repeats allowed)")
        if name in ("derive-f", "profile-check"):
            p.add_argument("--n", type=int, default=0)
        if name == "profile-check":
            p.add_argument("--profile", help="profile document; default is derived from the family")
            p.add_argument("--tuples", help="scale tuples, '2,3;3,4'; default is every window tuple")
        if name == "strategy-check":
            p.add_argument("--strategy", required=True)
            p.add_argument("--max-truncation", type=int, default=16)
            p.add_argument("--max-rounds", type=int, default=3)
    return parser


def _seeded(args):
    # --seed replaces the seed of a generated space given inline or on disk
    if args.seed is None or args.command not in ("components", "decompose", "family", "trasdim",
                                                 "derive-f", "profile-check"):
        return
    doc = _load(args.input, "input")
    target = doc.get("space", doc) if isinstance(doc, dict) else None
    if isinstance(target, dict) and target.get("kind") == "random":
        target["seed"] = args.seed
        args.input = _canonical(doc)


def _table(report: dict) -> str:
    lines = [f"op: {report['op']}", f"status: {report['status']}"]
    for section in ("params", "truncation", "result", "stats"):
        for key, value in report.get(section, {}).items():
            if isinstance(value, (dict, list)):
                value = _canonical(value)
                if len(value) > 100:
                    value = value[:97] + "..."
            lines.append(f"{section}.{key}: {value}")
    return "\n".join(lines)


def run(argv: Optional[Sequence[str]] = None, out=None) -> int:
    out = out or sys.stdout
    parser = make_parser()
    args = parser.parse_args(argv)
    func = COMMANDS[args.command][0]
    try:
        _seeded(args)
        params, truncation, result, stats, definitive, input_doc = func(args)
    except InputError as exc:
        print(f"trasdim {args.command}: input error: {exc}", file=sys.stderr)
        return 1
    except (OrdinalError, FamilyError, StrategyError, MetricError) as exc:
        print(f"trasdim {args.command}: input error: {exc}", file=sys.stderr)
        return 1
    except SolverUnknown as exc:
        params, truncation, input_doc = args.context
        result = {"detail": str(exc), "unknown_slots": list(exc.slots), "nodes": exc.nodes}
        stats, definitive = {}, False
    report = {
        "schema": SCHEMA,
        "op": args.command,
        "status": "Definitive" if definitive else "Unknown",
        "input": {"digest": _digest(input_doc), "doc": input_doc},
        "params": params,
        "truncation": truncation,
        "result": result,
        "stats": stats,
    }
    if args.format == "json":
        print(json.dumps(report, sort_keys=True, indent=1, default=_json_default), file=out)
    else:
        print(_table(report), file=out)
    return 0 if definitive else 2


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
