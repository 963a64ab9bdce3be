"""Command-line entry point ``prismkit``.

Subcommand families: ``witt``, ``delta``, ``prism``, ``ht``, ``verify``.
Settings come from defaults, then an optional ``--config`` file of
``key=value`` lines, then command-line flags.  Machine output goes to
stdout; diagnostics and error names go to stderr.

Exit codes: 0 success, 1 domain error or failed verification, 2 usage error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import dataclass, fields

from . import harness, witt_polys
from .base_rings import (
    Precision,
    RingHom,
    dumps,
    elem_from_json,
    elem_to_json,
    is_prime,
    mk_ring,
    parse_spec_id,
)
from .delta import delta_lift_hom, delta_on_witt, free_delta_ring
from .errors import ParseError, PrismkitError, SpecMismatch
from .hodge_tate import (
    exp_G,
    integrality_profile,
    log_G,
    prismatic_log,
    solve_frobenius_equation,
    star_inverse,
    star_product,
)
from .prism import (
    CATALOG,
    envelope_points,
    hodge_tate_quotient,
    is_distinguished,
    mk_prism,
    prismatic_envelope,
)
from .witt import (
    WittVector,
    frobenius,
    ghost,
    restriction,
    teichmuller,
    verschiebung,
    witt_add,
    witt_from_json,
    witt_mul,
    witt_neg,
    witt_sub,
    witt_to_json,
)


class UsageError(Exception):
    pass


@dataclass
class Config:
    p: int = 2
    padic_digits: int = 4
    witt_length: int = 3
    delta_depth: int = 2
    series_order: int = 8
    enumeration_budget: int = 1 << 16
    seed: int = 0

    def precision(self) -> Precision:
        return Precision(self.p, self.padic_digits, self.witt_length, self.delta_depth, self.series_order)


# flag name -> config field
FLAG_FIELDS = {
    "p": "p",
    "prec": "padic_digits",
    "witt_len": "witt_length",
    "depth": "delta_depth",
    "order": "series_order",
    "budget": "enumeration_budget",
    "seed": "seed",
}
# accepted spellings inside a config file
FILE_KEYS = {f.name: f.name for f in fields(Config)}
FILE_KEYS.update({"prec": "padic_digits", "N": "padic_digits", "witt_len": "witt_length", "n": "witt_length",
                  "depth": "delta_depth", "D": "delta_depth", "order": "series_order", "M": "series_order",
                  "budget": "enumeration_budget"})


def read_config_file(path: str) -> dict:
    out = {}
    try:
        with open(path, encoding="utf-8") as fh:
            lines = fh.read().splitlines()
    except OSError as exc:
        raise UsageError(f"cannot read config file {path}: {exc.strerror}") from None
    for lineno, raw in enumerate(lines, 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{lineno}: expected key=value")
        key, value = (s.strip() for s in line.split("=", 1))
        if key not in FILE_KEYS:
            raise UsageError(f"{path}:{lineno}: unknown key {key!r}")
        try:
            out[FILE_KEYS[key]] = int(value)
        except ValueError:
            raise UsageError(f"{path}:{lineno}: {key} must be an integer") from None
    return out


def build_config(args) -> Config:
    values = {}
    if getattr(args, "config", None):
        values.update(read_config_file(args.config))
    for flag, name in FLAG_FIELDS.items():
        v = getattr(args, flag, None)
        if v is not None:
            values[name] = v
    cfg = Config(**values)
    for f in fields(Config):
        v = getattr(cfg, f.name)
        if f.name != "seed" and v < 1:
            raise UsageError(f"{f.name} must be positive")
    if not is_prime(cfg.p):
        raise UsageError(f"p={cfg.p} is not prime")
    return cfg


# --------------------------------------------------------------------------
# I/O helpers


def load_json(path: str):
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: {exc.msg}") from None


def load_elem(path: str, spec=None):
    obj = load_json(path)
    try:
        return elem_from_json(obj, spec)
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"{path}: malformed element ({exc})") from None


def load_witt(path: str, cfg: Config) -> WittVector:
    obj = load_json(path)
    try:
        x = witt_from_json(obj)
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"{path}: malformed Witt vector ({exc})") from None
    if x.p != cfg.p:
        raise SpecMismatch(f"{path} lives over p={x.p}, but p={cfg.p} was requested")
    n = cfg.witt_length
    if x.length < n:
        raise SpecMismatch(f"{path} has {x.length} components; --witt-len asks for {n}")
    return restriction(x, x.length - n) if x.length > n else x


def emit(obj, fmt: str, text: str | None = None):
    if fmt == "text" and text is not None:
        print(text)
    else:
        print(dumps(obj))


def _witt_text(x: WittVector) -> str:
    return "(" + ", ".join(str(c) for c in x.components) + ")"


# --------------------------------------------------------------------------
# witt


def cmd_witt(args, cfg: Config) -> int:
    op = args.witt_cmd
    if op == "poly":
        tab = witt_polys.table(cfg.p)
        rows = tab.to_text(args.op, args.index)
        obj = {"p": cfg.p, "op": args.op, "index": args.index,
               "terms": [{"coeff": str(c), "monomial": m} for c, m in rows]}
        text = " + ".join(f"{c}*{m}" for c, m in rows) or "0"
        emit(obj, args.format, text)
        return 0
    if op == "teichmuller":
        r = load_elem(args.inputs[0])
        x = teichmuller(r, cfg.witt_length)
        emit(witt_to_json(x), args.format, _witt_text(x))
        return 0
    arity = {"add": 2, "sub": 2, "mul": 2, "neg": 1, "frobenius": 1, "verschiebung": 1,
             "ghost": 1, "delta": 1}[op]
    if len(args.inputs) != arity:
        raise UsageError(f"witt {op} takes {arity} --in file(s)")
    xs = [load_witt(path, cfg) for path in args.inputs]
    if op == "ghost":
        g = ghost(xs[0])
        emit({"ghost": [elem_to_json(c) for c in g]}, args.format, ", ".join(str(c) for c in g))
        return 0
    fn = {"add": witt_add, "sub": witt_sub, "mul": witt_mul, "neg": witt_neg, "frobenius": frobenius,
          "verschiebung": verschiebung, "delta": delta_on_witt}[op]
    x = fn(*xs)
    emit(witt_to_json(x), args.format, _witt_text(x))
    return 0


# --------------------------------------------------------------------------
# delta


def _free_ring(args, cfg: Config):
    names = [s.strip() for s in args.gens.split(",") if s.strip()]
    return free_delta_ring(len(names), cfg.delta_depth, cfg.precision(), names=names)


def cmd_delta(args, cfg: Config) -> int:
    A = _free_ring(args, cfg)
    if args.delta_cmd == "ring":
        emit(A.to_json(), args.format, A.carrier.spec_id)
        return 0
    a = load_elem(args.inputs[0], A.carrier)
    if args.delta_cmd == "apply":
        out = A.delta_iter(a, args.times)
    elif args.delta_cmd == "phi":
        out = a
        for _ in range(args.times):
            out = A.phi(out)
    else:  # lift
        S = parse_spec_id(args.target)
        raw = load_json(args.assign) if args.assign else {}
        images = {}
        for v in A.carrier.vars:
            val = raw.get(v, 0)
            images[v] = elem_from_json(val, S) if isinstance(val, dict) else S.coerce(val)
        lift = delta_lift_hom(A, RingHom(A.carrier, S, images), cfg.witt_length)
        x = lift(a)
        emit(witt_to_json(x), args.format, _witt_text(x))
        return 0
    emit(elem_to_json(out), args.format, str(out))
    return 0


# --------------------------------------------------------------------------
# prism


def _prism(args, cfg: Config):
    return mk_prism(args.catalog, cfg.precision(), eisenstein=args.eisenstein, k=args.k,
                    orientation=getattr(args, "orientation", None),
                    check=args.prism_cmd != "check")


def _numerators(text: str) -> list:
    items = [s.strip() for s in text.split(",") if s.strip()]
    if not items:
        raise UsageError("--numerators needs at least one expression")
    return items


def cmd_prism(args, cfg: Config) -> int:
    P = _prism(args, cfg)
    cmd = args.prism_cmd
    if cmd == "new":
        emit(P.to_json(), args.format, f"{P.name} prism on {P.carrier_id} with d = {P.d}")
        return 0
    if cmd == "check":
        rep = is_distinguished(P, budget=cfg.enumeration_budget)
        obj = {"prism": P.to_json(), **rep.to_json()}
        text = f"distinguished: {str(rep.verdict).lower()}"
        if rep.witness is not None:
            text += f"\nwitness: p = ({rep.witness[0]})*d + ({rep.witness[1]})*phi(d)"
        text += f"\ndelta(d) unit: {str(rep.delta_unit).lower()}; criteria agree: {str(rep.agree).lower()}"
        emit(obj, args.format, text)
        return 0
    if cmd == "ht-quotient":
        Q, red = hodge_tate_quotient(P)
        emit({"prism": P.to_json(), "quotient": Q.spec_id, "d_image": elem_to_json(red(P.d))},
             args.format, Q.spec_id)
        return 0
    E = prismatic_envelope(P, _numerators(args.numerators), cfg.delta_depth)
    if cmd == "envelope":
        obj = E.to_json()
        diag = obj["diagnostics"]
        text = "\n".join(
            [f"envelope over {P.carrier_id}, numerators {list(E.numerator_text)}, depth {E.depth}"]
            + [f"  solve {r.var} -> {r.rhs}" if r.kind == "solve" else f"  check {r.relation} = 0"
               for r in E.rules]
            + [f"locally confluent on monitored pairs: {str(diag['locally_confluent']).lower()}"])
        emit(obj, args.format, text)
        return 0
    # points
    S = parse_spec_id(args.target)
    bp = load_json(args.base_point) if args.base_point else {}
    if not isinstance(bp, dict):
        raise ParseError("the base point file must hold a JSON object")
    base_point = {k: (elem_from_json(v, S) if isinstance(v, dict) else v) for k, v in bp.items()}
    rep = envelope_points(E, S, cfg.witt_length, base_point, budget=cfg.enumeration_budget)
    obj = rep.to_json()
    emit(obj, args.format, f"|A| = {len(rep.set_a)}, |B| = {len(rep.set_b)}, equal: {str(rep.equal).lower()}")
    return 0 if rep.equal else 1


# --------------------------------------------------------------------------
# ht


def cmd_ht(args, cfg: Config) -> int:
    cmd = args.ht_cmd
    if cmd == "solve":
        R = parse_spec_id(args.R)
        sol = solve_frobenius_equation(R, cfg.witt_length if args.n is None else args.n, args.m,
                                       budget=cfg.enumeration_budget)
        obj = sol.to_json()
        text = "\n".join(_witt_text(x) for x in sol.solutions) + f"\ntorsor: {str(sol.torsor).lower()}"
        emit(obj, args.format, text)
        return 0 if sol.torsor and sol.contains_p_power else 1
    if cmd == "star":
        if args.inverse:
            if len(args.inputs) != 2:
                raise UsageError("ht star --inverse takes --in a --in c")
            a, c = (load_elem(path) for path in args.inputs)
            out = star_inverse(a, c)
        else:
            if len(args.inputs) != 3:
                raise UsageError("ht star takes --in a --in b --in c")
            a, b, c = (load_elem(path) for path in args.inputs)
            out = star_product(a, b, c)
        emit(elem_to_json(out), args.format, str(out))
        return 0
    if cmd == "grouplaw":
        M = cfg.series_order
        obj = {"order": M, "exp_G": exp_G(M).to_json(), "log_G": log_G(M).to_json()}
        lines = ["exp_G: " + " + ".join(f"({c['value']})*x^{c['exponents'][0]}"
                                         for c in obj["exp_G"]["coefficients"]),
                 "log_G: " + " + ".join(f"({c['value']})*a^{c['exponents'][0]}"
                                         for c in obj["log_G"]["coefficients"])]
        if args.eisenstein:
            prof = integrality_profile(args.eisenstein, cfg.p, M)
            obj["integrality"] = prof.to_json()
            lines.append(f"v(E'(pi)) = {prof.v_E_prime} ({prof.regime} 1/(p-1)); "
                         f"all integral: {str(prof.all_integral).lower()}")
        emit(obj, args.format, "\n".join(lines))
        return 0
    # log
    Z = mk_ring("IntegersModPN", precision=cfg.precision())
    if os.path.exists(args.z):
        z = load_elem(args.z, Z)
    else:
        try:
            z = Z.from_int(int(args.z))
        except ValueError:
            raise UsageError("--z takes an element file or an integer") from None
    res = prismatic_log(z, args.terms)
    emit(res.to_json(), args.format, f"{res.value} (epsilon = {res.epsilon}, {res.terms} terms)")
    return 0


# --------------------------------------------------------------------------
# verify


def cmd_verify(args, cfg: Config) -> int:
    hc = harness.HarnessConfig(seed=cfg.seed, budget=cfg.enumeration_budget, timings=args.timings)
    if args.corrupt:
        hc = harness.HarnessConfig.from_mapping({**vars(hc), "corrupt_poly": args.corrupt})
    names = None if args.name == "all" else [args.name]
    if names and names[0] not in harness.REGISTRY:
        raise UsageError(f"unknown check {args.name!r}; known: {', '.join(harness.check_names())}")
    reports = harness.run_all(hc, names)
    if args.format == "text":
        print(harness.summary_table(reports))
    else:
        sys.stdout.write(harness.reports_jsonl(reports, args.timings))
        print(harness.summary_table(reports), file=sys.stderr)
    return 1 if harness.failures(reports) else 0


# --------------------------------------------------------------------------
# parser


def _common() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False, argument_default=argparse.SUPPRESS)
    common.add_argument("--p", type=int, help="the prime")
    common.add_argument("--prec", type=int, help="p-adic digits N")
    common.add_argument("--witt-len", dest="witt_len", type=int, help="Witt length n")
    common.add_argument("--depth", type=int, help="delta depth D")
    common.add_argument("--order", type=int, help="series order M")
    common.add_argument("--seed", type=int, help="harness seed")
    common.add_argument("--budget", type=int, help="enumeration budget")
    common.add_argument("--config", help="key=value config file")
    common.add_argument("--format", choices=("json", "text"), help="output format")
    return common


def build_parser() -> argparse.ArgumentParser:
    common = _common()
    parser = argparse.ArgumentParser(prog="prismkit", parents=[common],
                                     description="Witt vectors, delta-rings and prisms at desk scale.")
    sub = parser.add_subparsers(dest="family", required=True)

    w = sub.add_parser("witt", help="truncated Witt vector arithmetic")
    wsub = w.add_subparsers(dest="witt_cmd", required=True)
    for name in ("add", "sub", "mul", "neg", "frobenius", "verschiebung", "ghost", "delta", "teichmuller"):
        sp = wsub.add_parser(name, parents=[common])
        sp.add_argument("--in", dest="inputs", action="append", required=True, help="JSON input file")
    sp = wsub.add_parser("poly", parents=[common], help="print a universal polynomial")
    sp.add_argument("--op", choices=witt_polys.OPS, required=True)
    sp.add_argument("--index", type=int, required=True)

    d = sub.add_parser("delta", help="truncated free delta-rings")
    dsub = d.add_subparsers(dest="delta_cmd", required=True)
    for name in ("ring", "apply", "phi", "lift"):
        sp = dsub.add_parser(name, parents=[common])
        sp.add_argument("--gens", default="x", help="comma-separated generator names")
        if name != "ring":
            sp.add_argument("--in", dest="inputs", action="append", required=True)
        if name in ("apply", "phi"):
            sp.add_argument("--times", type=int, default=1)
        if name == "lift":
            sp.add_argument("--target", required=True, help="target spec id, e.g. F_2")
            sp.add_argument("--assign", help="JSON file mapping generators to target elements")

    pr = sub.add_parser("prism", help="oriented prisms and envelopes")
    psub = pr.add_subparsers(dest="prism_cmd", required=True)
    for name in ("new", "check", "ht-quotient", "envelope", "points"):
        sp = psub.add_parser(name, parents=[common])
        sp.add_argument("--catalog", choices=CATALOG, required=True)
        sp.add_argument("--eisenstein", help='Eisenstein polynomial, "1,0,-2" or "u^2-2"')
        sp.add_argument("--k", type=int, default=1, help="perfectoid level")
        if name == "check":
            sp.add_argument("--orientation", help="orientation expression in the carrier")
        if name in ("envelope", "points"):
            sp.add_argument("--numerators", required=True, help='comma-separated, e.g. "t" or "u,u^2"')
        if name == "points":
            sp.add_argument("--target", required=True, help="finite target spec id")
            sp.add_argument("--base-point", dest="base_point", help="JSON file assigning base generators")

    h = sub.add_parser("ht", help="Hodge-Tate computations")
    hsub = h.add_subparsers(dest="ht_cmd", required=True)
    sp = hsub.add_parser("solve", parents=[common])
    sp.add_argument("--R", required=True, help="finite F_p-algebra spec id")
    sp.add_argument("--n", type=int, help="Witt length (defaults to --witt-len)")
    sp.add_argument("--m", type=int, required=True)
    sp = hsub.add_parser("star", parents=[common])
    sp.add_argument("--in", dest="inputs", action="append", required=True)
    sp.add_argument("--inverse", action="store_true")
    sp = hsub.add_parser("grouplaw", parents=[common])
    sp.add_argument("--eisenstein")
    sp = hsub.add_parser("log", parents=[common])
    sp.add_argument("--z", required=True, help="element file or integer")
    sp.add_argument("--terms", type=int)

    v = sub.add_parser("verify", parents=[common], help="run the lemma harness")
    v.add_argument("name", help='"all" or a check name')
    v.add_argument("--timings", action="store_true", help="include runtimes in reports")
    v.add_argument("--corrupt", help="negative control p:op:index")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    if not hasattr(args, "format"):
        args.format = "json"
    try:
        cfg = build_config(args)
        handler = {"witt": cmd_witt, "delta": cmd_delta, "prism": cmd_prism, "ht": cmd_ht,
                   "verify": cmd_verify}[args.family]
        return handler(args, cfg)
    except UsageError as exc:
        print(f"prismkit: usage error: {exc}", file=sys.stderr)
        return 2
    except PrismkitError as exc:
        print(f"{exc.name}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
