"""Command-line interface: ``ivpkit <subcommand> [options]``.

Every subcommand prints one JSON document (or a CSV stream with
``--format csv``).  Exit codes: 0 when a verdict was computed, 2 on bad input,
3 when a search ran out of budget.  Wall-clock fields are left out unless
``--timings`` is given, so identical inputs give byte-identical output.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from typing import Any, Callable, Sequence

from . import collapsing, factorials, ffield, optimality, schinzel
from .quadring import (
    QuadRing,
    format_element,
    ideals_of_norm,
    parse_ideal,
    parse_ring,
    parse_set,
    residues_mod,
    split_prime,
)

EXIT_OK, EXIT_INPUT, EXIT_BUDGET = 0, 2, 3
THREADS_ENV = "IVPKIT_THREADS"


class InputError(ValueError):
    pass


@dataclass
class JobConfig:
    command: str
    ring: str | None = None
    params: dict = field(default_factory=dict)
    format: str = "json"
    seed: int = 0
    budget: float | None = None

    def to_json(self) -> str:
        return json.dumps(asdict(self), sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> JobConfig:
        data = json.loads(text)
        if not isinstance(data, dict) or "command" not in data:
            raise InputError("config must be a JSON object with a 'command' key")
        unknown = set(data) - {"command", "ring", "params", "format", "seed", "budget"}
        if unknown:
            raise InputError(f"unknown config keys: {sorted(unknown)}")
        return cls(**data)


# --------------------------------------------------------------------------
# argument helpers


def _ring(args: argparse.Namespace) -> QuadRing:
    if args.ring is None:
        raise InputError("--ring is required")
    try:
        return parse_ring(args.ring)
    except ValueError as exc:
        raise InputError(f"unknown ring {args.ring!r}: {exc}") from None


def _set(ring: QuadRing, text: str | None) -> list:
    if text is None:
        raise InputError("--set is required")
    try:
        S = parse_set(ring, text)
    except ValueError as exc:
        raise InputError(f"malformed element syntax: {exc}") from None
    if len(set(S)) != len(S):
        raise InputError("set elements must be distinct")
    return S


def _nonneg(value: int | None, name: str) -> int:
    if value is None:
        raise InputError(f"--{name} is required")
    if value < 0:
        raise InputError(f"--{name} must be non-negative")
    return value


def _prime(ring: QuadRing, p: int | None, which: int):
    if p is None:
        raise InputError("--p is required")
    try:
        primes = split_prime(ring, p)
    except ValueError as exc:
        raise InputError(str(exc)) from None
    if not 0 <= which < len(primes):
        raise InputError(f"--which must lie in [0, {len(primes)})")
    return primes[which]


def _budget(args: argparse.Namespace, default: float) -> float:
    if args.budget is None:
        return default
    if args.budget < 0:
        raise InputError("--budget must be non-negative")
    return args.budget


def _enumeration(text: str | None) -> list[int] | None:
    if text is None:
        return None
    try:
        return [int(t) for t in text.split(",")]
    except ValueError:
        raise InputError(f"malformed enumeration {text!r}") from None


def _strip_timings(obj: Any, keep: bool) -> Any:
    if keep or not isinstance(obj, dict):
        return obj
    return {k: v for k, v in obj.items() if k != "wall_time"}


# --------------------------------------------------------------------------
# subcommands: each returns (payload, csv_rows or None, exit_code)

Result = tuple[Any, list[list] | None, int]


def cmd_factorial(args: argparse.Namespace) -> Result:
    ring = _ring(args)
    n = _nonneg(args.n, "n")
    if args.set is not None:
        S = _set(ring, args.set)
        if n >= len(S):
            raise InputError("need n < |S|")
        fac = factorials.generalized_factorial(S, n)
    else:
        fac = factorials.ring_factorial(ring, n)
    rows = [[str(P), e] for P, e in fac.items()]
    return {"factorization": fac.to_json()}, [["prime", "exponent"], *rows], EXIT_OK


def cmd_pordering(args: argparse.Namespace) -> Result:
    ring = _ring(args)
    S = _set(ring, args.set)
    if not S:
        raise InputError("--set must be nonempty")
    P = _prime(ring, args.p, args.which)
    length = args.length if args.length is not None else len(S)
    if not 1 <= length <= len(S):
        raise InputError(f"--length must lie in [1, {len(S)}]")
    res = factorials.p_ordering(S, P, length)
    payload = {"prime": str(P), "ordering": [format_element(x) for x in res.ordering],
               "valuations": list(res.valuations)}
    rows = [["k", "element", "valuation"]] + [[k, format_element(x), v]
                                            for k, (x, v) in enumerate(zip(res.ordering, res.valuations))]
    return payload, rows, EXIT_OK


def cmd_energy(args: argparse.Namespace) -> Result:
    ring = _ring(args)
    S = _set(ring, args.set)
    if len(S) < 2:
        raise InputError("energy needs at least two elements")
    return optimality.energy(S).to_json(), None, EXIT_OK


def cmd_check_aue(args: argparse.Namespace) -> Result:
    ring = _ring(args)
    S = _set(ring, args.set)
    if not S:
        raise InputError("--set must be nonempty")
    if args.ideal is not None:
        try:
            I = parse_ideal(ring, args.ideal)
        except ValueError as exc:
            raise InputError(str(exc)) from None
        return {"verdict": optimality.is_aue(S, I), "ideal": str(I)}, None, EXIT_OK
    return optimality.is_aue_all(S).to_json(), None, EXIT_OK


def cmd_check_universal(args: argparse.Namespace) -> Result:
    ring = _ring(args)
    S = _set(ring, args.set)
    n = _nonneg(args.n, "n")
    return optimality.is_n_universal(S, n, ring).to_json(), None, EXIT_OK


def cmd_check_optimal(args: argparse.Namespace) -> Result:
    ring = _ring(args)
    S = _set(ring, args.set)
    if not S:
        raise InputError("--set must be nonempty")
    return optimality.is_n_optimal(S).to_json(), None, EXIT_OK


def cmd_check_newton(args: argparse.Namespace) -> Result:
    ring = _ring(args)
    S = _set(ring, args.set)
    return optimality.is_newton_sequence(S, ring).to_json(), None, EXIT_OK


def cmd_search_optimal(args: argparse.Namespace) -> Result:
    ring = _ring(args)
    n = _nonneg(args.n, "n")
    if args.radius is None or args.radius <= 0:
        raise InputError("--radius must be positive")
    rep = optimality.search_n_optimal(ring, n, args.radius, _budget(args, 60.0))
    payload = _strip_timings(rep.to_json(), args.timings)
    code = EXIT_OK if rep.exhausted else EXIT_BUDGET
    return payload, None, code


def cmd_construct_universal(args: argparse.Namespace) -> Result:
    ring = _ring(args)
    n = _nonneg(args.n, "n")
    res = optimality.construct_universal_plus2(ring, n, _budget(args, 60.0), args.seed)
    if res.verified and not optimality.is_n_universal(list(res.elements), n).verdict:
        raise AssertionError("constructed set failed re-verification")
    payload = _strip_timings(res.to_json(), args.timings)
    return payload, None, EXIT_OK if res.verified else EXIT_BUDGET


def cmd_collapse(args: argparse.Namespace) -> Result:
    ring = _ring(args)
    S = _set(ring, args.set)
    try:
        spec = collapsing.CollapseSpec(ring, args.direction, Fraction(args.offset), args.h1)
    except ValueError as exc:
        raise InputError(str(exc)) from None
    out = collapsing.collapse(S, spec)
    payload = {"before": [format_element(x) for x in S], "after": [format_element(x) for x in out],
               "collapsed_before": collapsing.is_collapsed(S, spec),
               "collapsed_after": collapsing.is_collapsed(out, spec),
               "reflection_symmetric": spec.reflection_symmetric}
    if len(S) >= 2:
        payload["energy"] = collapsing.energy_delta(S, spec).to_json()
    rows = [["x", "y", "label"]] + [[repr(round(x, 12)), repr(round(y, 12)), lab]
                                    for x, y, lab in collapsing.plot_rows(S, "before")
                                    + collapsing.plot_rows(out, "after")]
    return payload, rows, EXIT_OK


def cmd_ff_order(args: argparse.Namespace) -> Result:
    n = _nonneg(args.n, "n")
    enum = _enumeration(args.enumeration)
    seq = [ffield.digit_ordering(args.q, k, enum) for k in range(n + 1)] if args.table else None
    s_n = ffield.digit_ordering(args.q, n, enum)
    rows = [["n", "s_n"]] + ([[k, str(s)] for k, s in enumerate(seq)] if seq else [[n, str(s_n)]])
    payload = [str(s) for s in seq] if seq else str(s_n)
    return payload, rows, EXIT_OK


def cmd_ff_verify(args: argparse.Namespace) -> Result:
    if args.length is None or args.length < 1:
        raise InputError("--length must be at least 1")
    if args.max_deg is None or args.max_deg < 1:
        raise InputError("--max-deg must be at least 1")
    res = ffield.verify_simultaneous(args.q, args.length, args.max_deg, _enumeration(args.enumeration))
    return res.to_json(), None, EXIT_OK


def cmd_schinzel_check(args: argparse.Namespace) -> Result:
    ring = _ring(args)
    S = _set(ring, args.set)
    payload = schinzel.is_schinzel_prefix(ring, S).to_json()
    if S and S[0].is_zero():
        payload["norm_growth"] = schinzel.norm_growth_check(ring, S).to_json()
    return payload, None, EXIT_OK


def cmd_schinzel_search(args: argparse.Namespace) -> Result:
    ring = _ring(args)
    if args.max_len is None or args.max_len < 1:
        raise InputError("--max-len must be at least 1")
    res = schinzel.search_schinzel(ring, args.max_len, _budget(args, 120.0), args.radius)
    payload = res.to_json()
    payload["norm_growth"] = schinzel.norm_growth_check(ring, res.sequence).to_json()
    return payload, None, EXIT_OK if res.exhausted_window else EXIT_BUDGET


def cmd_ek_estimate(args: argparse.Namespace) -> Result:
    ring = _ring(args)
    if args.n_max is None or args.n_max < 100:
        raise InputError("--n-max must be at least 100")
    est = factorials.estimate_euler_kronecker(ring, args.n_max)
    payload = {"c_hat": round(est.c_hat, 12), "gamma_diff_hat": round(est.gamma_diff_hat, 12),
               "n_max": est.n_max, "residual": round(est.residual, 12)}
    if ring.is_imaginary:
        vals = factorials.dirichlet_l_values(ring, args.terms)
        payload["lseries_oracle"] = round(vals.dL / vals.L, 12)
        payload["oracle_error_bound"] = float(f"{vals.error_bound:.3e}")
    table = factorials.log_norm_factorial_table(ring, args.n_max)
    rows = [["n", "log_norm_factorial"]] + [[n, repr(round(float(table[n]), 10))]
                                          for n in factorials.geometric_grid(1, args.n_max)]
    return payload, rows, EXIT_OK


def cmd_residues(args: argparse.Namespace) -> Result:
    ring = _ring(args)
    try:
        I = parse_ideal(ring, args.ideal) if args.ideal else None
    except ValueError as exc:
        raise InputError(str(exc)) from None
    if I is None:
        raise InputError("--ideal is required")
    reps = [format_element(x) for x in residues_mod(I)]
    return {"ideal": str(I), "norm": I.norm, "residues": reps}, [["residue"]] + [[r] for r in reps], EXIT_OK


def cmd_ideals(args: argparse.Namespace) -> Result:
    ring = _ring(args)
    if args.norm is None or args.norm < 1:
        raise InputError("--norm must be a positive integer")
    ideals = [str(I) for I in ideals_of_norm(ring, args.norm)]
    return {"norm": args.norm, "ideals": ideals}, [["ideal"]] + [[s] for s in ideals], EXIT_OK


# --------------------------------------------------------------------------
# parser


def _common(p: argparse.ArgumentParser, ring: bool = True) -> None:
    if ring:
        p.add_argument("--ring", help='"Z", "d=-1", "-3", ...')
    p.add_argument("--format", choices=("json", "csv", "plot-points"), default="json")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--budget", type=float, default=None, help="seconds")
    p.add_argument("--timings", action="store_true", help="include wall-clock fields")


COMMANDS: dict[str, tuple[Callable[[argparse.Namespace], Result], Callable[[argparse.ArgumentParser], None]]] = {}


def _register(name: str, func: Callable, setup: Callable[[argparse.ArgumentParser], None], ring: bool = True):
    def full(p: argparse.ArgumentParser) -> None:
        _common(p, ring)
        setup(p)
    COMMANDS[name] = (func, full)


def _opts_set(p):
    p.add_argument("--set", help='comma-separated elements, e.g. "0,1,w"')


_register("factorial", cmd_factorial, lambda p: (p.add_argument("--n", type=int), _opts_set(p)))
_register("pordering", cmd_pordering, lambda p: (
    _opts_set(p), p.add_argument("--p", type=int), p.add_argument("--which", type=int, default=0),
    p.add_argument("--length", type=int)))
_register("energy", cmd_energy, _opts_set)
_register("check-aue", cmd_check_aue, lambda p: (_opts_set(p), p.add_argument("--ideal")))
_register("check-universal", cmd_check_universal, lambda p: (_opts_set(p), p.add_argument("--n", type=int)))
_register("check-optimal", cmd_check_optimal, _opts_set)
_register("check-newton", cmd_check_newton, _opts_set)
_register("search-optimal", cmd_search_optimal, lambda p: (
    p.add_argument("--n", type=int), p.add_argument("--radius", type=float)))
_register("construct-universal", cmd_construct_universal, lambda p: p.add_argument("--n", type=int))
_register("collapse", cmd_collapse, lambda p: (
    _opts_set(p), p.add_argument("--direction", required=True),
    p.add_argument("--offset", default="1/2"), p.add_argument("--h1", type=int, choices=(1, -1), default=1)))
_register("ff-order", cmd_ff_order, lambda p: (
    p.add_argument("--q", type=int, required=True), p.add_argument("--n", type=int),
    p.add_argument("--enumeration"), p.add_argument("--table", action="store_true")), ring=False)
_register("ff-verify", cmd_ff_verify, lambda p: (
    p.add_argument("--q", type=int, required=True), p.add_argument("--length", type=int),
    p.add_argument("--max-deg", type=int), p.add_argument("--enumeration")), ring=False)
_register("schinzel-check", cmd_schinzel_check, _opts_set)
_register("schinzel-search", cmd_schinzel_search, lambda p: (
    p.add_argument("--max-len", type=int), p.add_argument("--radius", type=float)))
_register("ek-estimate", cmd_ek_estimate, lambda p: (
    p.add_argument("--n-max", type=int), p.add_argument("--terms", type=int, default=10**6)))
_register("residues", cmd_residues, lambda p: p.add_argument("--ideal", help='"hnf(a,b,c)"'))
_register("ideals", cmd_ideals, lambda p: p.add_argument("--norm", type=int))


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):
        raise InputError(message)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="ivpkit", description=__doc__.splitlines()[0])
    parser.add_argument("--config", help="JSON job config; command-line flags override it")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)
    for name, (_, setup) in COMMANDS.items():
        setup(sub.add_parser(name))
    return parser


def _config_argv(path: str, argv: list[str]) -> list[str]:
    try:
        with open(path) as fh:
            job = JobConfig.from_json(fh.read())
    except OSError as exc:
        raise InputError(f"cannot read config: {exc}") from None
    except json.JSONDecodeError as exc:
        raise InputError(f"malformed config: {exc}") from None
    out = [job.command, "--format", job.format, "--seed", str(job.seed)]
    if job.ring is not None:
        out += ["--ring", job.ring]
    if job.budget is not None:
        out += ["--budget", str(job.budget)]
    for key, val in job.params.items():
        flag = "--" + key.replace("_", "-")
        if val is True:
            out.append(flag)
        elif val not in (False, None):
            out += [flag, str(val)]
    return out + argv


def _emit(payload: Any, rows: list[list] | None, fmt: str, out) -> None:
    if fmt == "json" or rows is None:
        out.write(json.dumps(payload, sort_keys=True) + "\n")
        return
    writer = csv.writer(out, lineterminator="\n")
    body = rows[1:] if fmt == "plot-points" else rows
    writer.writerows(body)


def _check_threads() -> None:
    raw = os.environ.get(THREADS_ENV)
    if raw is not None and (not raw.isdigit() or int(raw) < 1):
        raise InputError(f"{THREADS_ENV} must be a positive integer")


def run(argv: Sequence[str] | None = None, out=None) -> int:
    out = out or sys.stdout
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        _check_threads()
        if "--config" in argv:
            i = argv.index("--config")
            if i + 1 >= len(argv):
                raise InputError("--config needs a path")
            argv = _config_argv(argv[i + 1], argv[:i] + argv[i + 2:])
        args = build_parser().parse_args(argv)
        if not args.command:
            raise InputError("a subcommand is required")
        func = COMMANDS[args.command][0]
        payload, rows, code = func(args)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    _emit(payload, rows, args.format, out)
    return code


def run_capture(argv: Sequence[str]) -> tuple[int, str]:
    buf = io.StringIO()
    code = run(argv, buf)
    return code, buf.getvalue()


def main() -> None:
    sys.exit(run())
