"""Command-line front end.

Reports are JSON with sorted keys and no floating point.  Exit codes:
0 success, 1 mathematical verdict failure (or invalid system), 2 I/O or
usage error.
"""

from __future__ import annotations

import argparse
import io
import json
import os
import random
import sys
import time
from fractions import Fraction
from pathlib import Path

from . import __version__
from .cases import write_confluence_file
from .confluence import extract_vector_field, vector_fields_agree
from .errors import (
    DSLSyntaxError,
    JetGroupoidError,
    NotIdentityAtSpecialValue,
    PoleAtSpecialValue,
    SystemValidationError,
    UnboundParameter,
    Unsaturated,
    UnknownVariable,
    ArityMismatch,
)
from .field import QQ, PrimeField, prime_for_seed
from .jetcore import coordinate_names, standard_frame
from .orbitprobe import (
    DEFAULT_PER_POINT,
    LOW,
    compare_specialisation,
    default_points,
    discover_relations,
    estimate_dimension,
    pin_parameters,
    sample_orbit_jets,
)
from .prolong import prolong_map, taylor_jet_of_iterate
from .sysdsl.expr import to_text
from .sysdsl.parser import parse_expr
from .sysdsl.system import ParamFamily, parse_system, validate_fibered

EXIT_OK, EXIT_VERDICT, EXIT_USAGE = 0, 1, 2
SYSTEM_ERRORS = (DSLSyntaxError, UnknownVariable, ArityMismatch, SystemValidationError)


class UsageError(Exception):
    pass


# -- encoding -------------------------------------------------------------------------


def encode(value):
    if isinstance(value, Fraction):
        return [value.numerator, value.denominator]
    if hasattr(value, "field") and hasattr(value, "v"):
        return int(value)
    if isinstance(value, dict):
        return {str(k): encode(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [encode(v) for v in value]
    if isinstance(value, float):
        raise TypeError("floating point values are not allowed in reports")
    return value


def emit(report: dict, out) -> None:
    out.write(json.dumps(encode(report), sort_keys=True, indent=2) + "\n")


def _seed_default() -> int:
    raw = os.environ.get("JETGROUPOID_SEED")
    if raw is None:
        return 0
    try:
        return int(raw)
    except ValueError:
        raise UsageError(f"JETGROUPOID_SEED must be an integer, got {raw!r}") from None


def _rational(text: str) -> Fraction:
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise UsageError(f"not a rational number: {text!r}") from None


def _modulus(args) -> int:
    if args.modulus is None:
        return prime_for_seed(args.seed)
    try:
        PrimeField(args.modulus)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    return args.modulus


def _load(path: str):
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise FileNotFoundError(f"cannot read {path}: {exc.strerror or exc}") from exc
    return parse_system(text)


def _pins(args, sys) -> dict:
    """--pin name=value binds; --pin name (or a,b,c) asks for a seeded random value."""
    out = {}
    for item in args.pin or []:
        for part in item.split(","):
            part = part.strip()
            if not part:
                continue
            name, _, value = part.partition("=")
            if name not in sys.params:
                raise UsageError(f"--pin {name}: not a parameter of {sys.name}")
            out[name] = _rational(value) if value else None
    return out


def _bind_exact(sys, args):
    pins = _pins(args, sys)
    if any(v is None for v in pins.values()):
        raise UsageError("random pins need --field fp")
    return sys.bind(pins) if pins else sys


def _base_report(command: str, args, modulus=None) -> dict:
    return {"command": command, "version": __version__, "seed": args.seed, "modulus": modulus}


def _point(text: str | None, n: int, what: str, rng, field) -> list:
    if text is None or text == "random":
        return [field.random(rng) for _ in range(n)]
    parts = [p for p in text.split(",") if p.strip()]
    if len(parts) != n:
        raise UsageError(f"{what} needs {n} value(s), got {len(parts)}")
    return [field.convert(_rational(p)) for p in parts]


def _field(args):
    if args.field == "qq":
        return QQ, None
    p = _modulus(args)
    return PrimeField(p), p


# -- commands --------------------------------------------------------------------------


def cmd_check(args, out) -> int:
    sys = _load(args.path)
    report = validate_fibered(sys, seed=args.seed)
    body = _base_report("check", args, report.jacobian_test.modulus if report.jacobian_test is not None else None)
    body.update(report.as_report())
    body["components"] = {
        **{f"sigma {b}": to_text(sys.sigma[b]) for b in sys.base},
        **{f"map {x}": to_text(sys.maps[x]) for x in sys.fiber},
        **{f"vfield {v}": to_text(e) for v, e in sys.vfield.items()},
    }
    body["bindings"] = dict(sys.bindings)
    emit(body, out)
    return EXIT_OK


def _frame_report(sys, frame) -> dict:
    return {
        "base": dict(zip(sys.base, frame.base)),
        "jet": frame.jet_values(sys.fiber),
    }


def cmd_prolong(args, out) -> int:
    sys = _bind_exact(_load(args.path), args) if args.field == "qq" else _load(args.path)
    fld, p = _field(args)
    if p is not None:
        sys = pin_parameters(sys, args.seed, p, _pins(args, sys))
    rng = random.Random(f"cli-point:{args.seed}")
    base = _point(args.base, len(sys.base), "--base", rng, fld)
    point = _point(args.point, sys.q, "--point", rng, fld)
    frame = standard_frame(base, point, args.order, fld)
    image = prolong_map(sys, frame)
    body = _base_report("prolong", args, p)
    body.update(
        {
            "system": sys.name,
            "k": args.order,
            "field": fld.name if p else "QQ",
            "parameters": dict(sys.bindings),
            "input": _frame_report(sys, frame),
            "output": _frame_report(sys, image),
        }
    )
    emit(body, out)
    return EXIT_OK


def cmd_iterate(args, out) -> int:
    sys = _bind_exact(_load(args.path), args) if args.field == "qq" else _load(args.path)
    fld, p = _field(args)
    if p is not None:
        sys = pin_parameters(sys, args.seed, p, _pins(args, sys))
    rng = random.Random(f"cli-point:{args.seed}")
    base = _point(args.base, len(sys.base), "--base", rng, fld)
    point = _point(args.point, sys.q, "--point", rng, fld)
    jet = taylor_jet_of_iterate(sys, base, point, args.n, args.order, fld)
    names = coordinate_names(sys.base, sys.fiber, args.order)
    body = _base_report("iterate", args, p)
    body.update(
        {
            "system": sys.name,
            "k": args.order,
            "n": args.n,
            "field": fld.name if p else "QQ",
            "parameters": dict(sys.bindings),
            "coordinates": [[n, v] for n, v in zip(names, jet.coordinates())],
        }
    )
    emit(body, out)
    return EXIT_OK


def _estimate_body(est) -> dict:
    body = est.as_report()
    return body


def cmd_dimension(args, out) -> int:
    sys = _load(args.path)
    p = _modulus(args)
    sys = pin_parameters(sys, args.seed, p, _pins(args, sys))
    start = time.perf_counter_ns()
    body = _base_report("dimension", args, p)
    body.update({"system": sys.name, "k": args.order, "d_max": args.degree, "parameters": dict(sys.bindings)})
    status = EXIT_OK
    try:
        est = estimate_dimension(
            sys, args.order, args.degree, args.points, args.iters, args.seed, p, args.jobs, args.per_point
        )
        body["unsaturated"] = False
    except Unsaturated as exc:
        est = exc.estimate
        body["unsaturated"] = True
    body.update(_estimate_body(est))
    rel = est.relations_at_dmax
    body["relations"] = rel
    if args.strict and (body["unsaturated"] or est.confidence == LOW):
        status = EXIT_VERDICT
    if args.timings:
        body["wall_time_ms"] = (time.perf_counter_ns() - start) // 1_000_000
    emit(body, out)
    return status


def cmd_relations(args, out) -> int:
    sys = _load(args.path)
    p = _modulus(args)
    sys = pin_parameters(sys, args.seed, p, _pins(args, sys))
    n = len(coordinate_names(sys.base, sys.fiber, args.order))
    per = min(args.per_point or args.iters, args.iters)
    pts = args.points or default_points(n, args.degree, per, sys.phase_dim)
    sample = sample_orbit_jets(sys, args.order, pts, args.iters, args.seed, p, args.jobs, per_point=per)
    rel = discover_relations(sample, args.degree, args.holdout)
    body = _base_report("relations", args, p)
    body.update(
        {
            "system": sys.name,
            "k": args.order,
            "parameters": dict(sys.bindings),
            "samples": sample.size,
            "coordinates": sample.names,
            **rel.as_report(),
        }
    )
    emit(body, out)
    return EXIT_OK


def _expectations(items) -> dict:
    out = {}
    for item in items or []:
        name, sep, expr = item.partition("=")
        if not sep:
            raise UsageError(f"--expect needs NAME=EXPR, got {item!r}")
        out[name.strip()] = parse_expr(expr)
    return out


def cmd_confluence(args, out) -> int:
    sys = _load(args.path)
    if args.param not in sys.params:
        raise UsageError(f"--param {args.param}: not a parameter of {sys.name}")
    p = _modulus(args)
    family = ParamFamily(sys, args.param, _rational(args.at))
    body = _base_report("confluence", args, p)
    body.update({"system": sys.name, "param": args.param, "at": family.special, "trials": args.trials})
    try:
        res = extract_vector_field(family, args.trials, args.seed, p)
    except (NotIdentityAtSpecialValue, PoleAtSpecialValue) as exc:
        body.update({"verdict": "FAIL", "error": type(exc).__name__, "component": exc.component, "message": str(exc)})
        emit(body, out)
        return EXIT_VERDICT
    body["vector_field"] = res.canonical()
    body["order"] = list(sys.base) + list(sys.fiber)
    body["identity_at_special_value"] = res.identity_test().as_report()
    body["remainder"] = res.remainder_test().as_report()
    status = EXIT_OK if res.remainder_test().is_zero else EXIT_VERDICT
    expected = _expectations(args.expect)
    if expected:
        unknown = sorted(set(expected) - set(body["order"]))
        if unknown:
            raise UsageError(f"--expect names unknown variable(s): {', '.join(unknown)}")
        match = vector_fields_agree(res.field, expected, args.trials, args.seed, p, partial=True)
        body["expected"] = {k: to_text(v) for k, v in expected.items()}
        body["expected_match"] = match.as_report()
        if not match.is_zero:
            status = EXIT_VERDICT
    body["verdict"] = "PASS" if status == EXIT_OK else "FAIL"
    emit(body, out)
    return status


def cmd_specialise(args, out) -> int:
    sys = _load(args.path)
    if args.param not in sys.params:
        raise UsageError(f"--param {args.param}: not a parameter of {sys.name}")
    p = _modulus(args)
    values = []
    for i, text in enumerate(args.at):
        if text == "random":
            values.append(Fraction(random.Random(f"special:{args.seed}:{p}:{i}").randrange(1, p)))
        else:
            values.append(_rational(text))
    pins = {k: v for k, v in _pins(args, sys).items() if k != args.param}
    base_sys = sys.bind({k: v for k, v in pins.items() if v is not None}) if pins else sys
    family = ParamFamily(base_sys, args.param, values[0])
    body = _base_report("specialise", args, p)
    body.update({"system": sys.name, "k": args.order, "d_max": args.degree})
    try:
        rep = compare_specialisation(
            family, args.order, args.degree, args.points, args.iters, args.seed, p, args.jobs, values[1:], args.per_point
        )
    except Unsaturated as exc:
        body.update({"verdict": "INCONCLUSIVE", "unsaturated": True, "estimate": exc.estimate.as_report()})
        emit(body, out)
        return EXIT_VERDICT
    body.update(rep.as_report(encode))
    body["unsaturated"] = False
    emit(body, out)
    return EXIT_OK if rep.verdict in ("PASS", "PASS-EQUALITY") else EXIT_VERDICT


def cmd_regen(args, out) -> int:
    text = write_confluence_file(args.output)
    body = _base_report("regen-confluence", args)
    body.update({"output": str(args.output), "lines": text.count("\n")})
    emit(body, out)
    return EXIT_OK


# -- parser ------------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="jetgroupoid", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=f"jetgroupoid {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p, seeded=True):
        if seeded:
            p.add_argument("--seed", type=int, default=None, help="master seed (default: $JETGROUPOID_SEED or 0)")
            p.add_argument("--modulus", type=int, default=None, help="prime > 2^30 (default: derived from the seed)")
        p.add_argument("--output", "-o", default=None, help="write the report here instead of stdout")

    def sampling(p):
        p.add_argument("--order", "-k", type=int, default=1)
        p.add_argument("--degree", "-d", type=int, default=3)
        p.add_argument("--points", type=int, default=None, help="base points (default: saturation threshold)")
        p.add_argument("--iters", type=int, default=200, help="iterate each point up to this count")
        p.add_argument("--per-point", type=int, default=DEFAULT_PER_POINT, help="iterates recorded per point")
        p.add_argument("--pin", action="append", help="name=value, or name / a,b,c for seeded random values")
        p.add_argument("--jobs", type=int, default=1)

    p = sub.add_parser("check", help="parse and validate a system file")
    p.add_argument("path")
    common(p)
    p.set_defaults(func=cmd_check)

    for name, func, help_ in (
        ("prolong", cmd_prolong, "prolong the standard frame at a point once"),
        ("iterate", cmd_iterate, "Taylor jet of the n-th iterate at a point"),
    ):
        p = sub.add_parser(name, help=help_)
        p.add_argument("path")
        common(p)
        p.add_argument("--order", "-k", type=int, default=1)
        p.add_argument("--base", default=None, help="comma-separated base point, or 'random'")
        p.add_argument("--point", default=None, help="comma-separated fiber point, or 'random'")
        p.add_argument("--pin", action="append")
        p.add_argument("--field", choices=("qq", "fp"), default="qq")
        if name == "iterate":
            p.add_argument("--n", type=int, default=1)
        p.set_defaults(func=func)

    p = sub.add_parser("dimension", help="estimate dim Mal_k by the Hilbert probe")
    p.add_argument("path")
    common(p)
    sampling(p)
    p.add_argument("--strict", action="store_true", help="exit 1 on low confidence")
    p.add_argument("--timings", action="store_true", help="add wall_time_ms (breaks byte-identical reruns)")
    p.set_defaults(func=cmd_dimension)

    p = sub.add_parser("relations", help="low-degree relations among iterate jets")
    p.add_argument("path")
    common(p)
    sampling(p)
    p.set_defaults(degree=2)
    p.add_argument("--holdout", type=float, default=0.25)
    p.set_defaults(func=cmd_relations)

    p = sub.add_parser("confluence", help="extract X from Phi_s = Id + (s - s0) X + ...")
    p.add_argument("path")
    common(p)
    p.add_argument("--param", required=True)
    p.add_argument("--at", default="0")
    p.add_argument("--trials", type=int, default=40)
    p.add_argument("--expect", action="append", help="NAME=EXPR expected component (repeatable)")
    p.set_defaults(func=cmd_confluence)

    p = sub.add_parser("specialise", aliases=["specialize"], help="compare dims at s0 and for the family")
    p.add_argument("path")
    common(p)
    sampling(p)
    p.add_argument("--param", required=True)
    p.add_argument("--at", nargs="+", default=["random"], help="special value(s); 'random' for a seeded pin")
    p.set_defaults(func=cmd_specialise)

    p = sub.add_parser("regen-confluence", help="regenerate the dP2 confluence system file")
    common(p, seeded=False)
    p.set_defaults(func=cmd_regen, output="systems/dp2_confluence.sys", seed=None)
    return ap


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    target = args.output if args.command != "regen-confluence" else None
    out = sys.stdout
    try:
        if args.seed is None:
            args.seed = _seed_default()
        if getattr(args, "order", 1) < 0 or getattr(args, "degree", 2) < 0:
            raise UsageError("--order and --degree must be non-negative")
        if target:
            buf = io.StringIO()
            code = args.func(args, buf)
            Path(target).write_text(buf.getvalue(), encoding="utf-8")
            return code
        return args.func(args, out)
    except FileNotFoundError as exc:
        _error(out, "IoError", str(exc))
        return EXIT_USAGE
    except (UsageError, UnboundParameter, ValueError) as exc:
        _error(out, type(exc).__name__, str(exc))
        return EXIT_USAGE
    except SYSTEM_ERRORS as exc:
        _error(out, type(exc).__name__, str(exc))
        return EXIT_VERDICT
    except JetGroupoidError as exc:
        _error(out, type(exc).__name__, str(exc))
        return EXIT_VERDICT
    except OSError as exc:
        _error(out, "IoError", str(exc))
        return EXIT_USAGE


def _error(out, kind: str, message: str) -> None:
    emit({"error": kind, "message": message, "version": __version__}, out)
    print(f"jetgroupoid: {kind}: {message}", file=sys.stderr)


if __name__ == "__main__":  # pragma: no cover
    raise SystemExit(main())
