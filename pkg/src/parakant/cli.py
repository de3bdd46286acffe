"""Command-line entry point: ``parakant <command> [options]``.

Exit status: 0 on success, 2 on invalid input or a failed precondition,
1 on internal failure (and for a ``check`` suite with failing properties).
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import _numeric as num
from .checks import SUITES, run_suite
from .disintegration import PartitionScheme, conditional_sequence, disintegrate, glue
from .io import (InputError, _numbers, csv_text, dumps, instance_from_json, joint_from_json, jsonable,
                 measure_from_json, read_mode, result_to_json, space_from_json)
from .measures import MeasureError
from .parametric import Family, ParametricError, sweep
from .skorohod import quantile_map, skorohod_sequence
from .solver import SolverError, solve_exact

EXIT_OK, EXIT_FAIL, EXIT_INPUT = 0, 1, 2


def _load(path: str):
    try:
        text = sys.stdin.read() if path == "-" else Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise InputError("input", str(exc)) from None
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError("input", f"malformed JSON: {exc}") from None


def _load_object(path: str) -> dict:
    doc = _load(path)
    if not isinstance(doc, dict):
        raise InputError("input", "expected a JSON object")
    return doc


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def parse_grid(text: str, mode: str) -> list:
    """``"a:b:k"`` for k evenly spaced points from a to b, or a comma-separated list."""
    text = text.strip()
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise InputError("--grid", "expected a:b:k")
        try:
            a, b = (num.parse_number(p, num.RATIONAL) for p in parts[:2])
            k = int(parts[2])
        except (ValueError, ZeroDivisionError):
            raise InputError("--grid", "expected numbers a, b and an integer k") from None
        if k < 1:
            raise InputError("--grid", "k must be positive")
        pts = [a] if k == 1 else [a + (b - a) * i / (k - 1) for i in range(k)]
        return [num.parse_number(str(p), mode) if mode == num.FLOAT else p for p in pts]
    try:
        return [num.parse_number(p, mode) for p in text.split(",") if p.strip()]
    except (ValueError, ZeroDivisionError) as exc:
        raise InputError("--grid", str(exc)) from None


def parse_sizes(text: str | None) -> tuple[int | None, int | None]:
    if not text:
        return None, None
    try:
        parts = [int(p) for p in text.split(":")]
    except ValueError:
        raise InputError("--sizes", "expected COUNT or COUNT:MAXDIM") from None
    if len(parts) > 2 or any(p < 1 for p in parts):
        raise InputError("--sizes", "expected COUNT or COUNT:MAXDIM with positive integers")
    return parts[0], (parts[1] if len(parts) == 2 else None)


def cmd_solve(args) -> int:
    cost, mu, nu, mode = instance_from_json(_load_object(args.input), args.mode)
    _emit(dumps(result_to_json(solve_exact(cost, mu, nu, mode))), args.out)
    return EXIT_OK


def cmd_check(args) -> int:
    if args.suite not in SUITES:
        raise InputError("--suite", f"unknown suite {args.suite!r}; choose from {', '.join(SUITES)}")
    count, max_dim = parse_sizes(args.sizes)
    report = run_suite(args.suite, seed=args.seed, mode=args.mode or num.RATIONAL,
                       count=count, max_dim=max_dim, depth=args.n or 10)
    _emit(dumps(jsonable(report)), args.out)
    return EXIT_OK if report["passed"] else EXIT_FAIL


def _family_from_json(doc, mode: str, grid_override: str | None) -> Family:
    gen = doc.get("generator", "tabulated")
    if grid_override:
        grid = parse_grid(grid_override, mode)
    else:
        raw = doc.get("grid")
        if not isinstance(raw, list):
            raise InputError("grid", "missing (or pass --grid)")
        grid = list(_numbers(raw, mode, "grid"))

    def cost(key):
        c = _numbers(doc.get(key), mode, key) if key in doc else None
        if c is None:
            raise InputError(key, "missing")
        return c

    def meas(key):
        if key not in doc:
            raise InputError(key, "missing")
        return measure_from_json(doc[key], mode, key)

    if gen == "constant":
        return Family.constant(grid, cost("cost"), meas("mu"), meas("nu"))
    if gen == "mixture":
        nu1 = meas("nu1") if "nu1" in doc else None
        nu0 = meas("nu0") if "nu0" in doc else meas("nu")
        return Family.mixture(grid, cost("cost"), meas("mu0"), meas("mu1"), nu0, nu1)
    if gen == "cost_interpolation":
        return Family.cost_interpolation(grid, cost("cost0"), cost("cost1"), meas("mu"), meas("nu"))
    if gen == "cost_scaling":
        return Family.cost_scaling(grid, cost("cost"), meas("mu"), meas("nu"))
    if gen == "tabulated":
        for key in ("costs", "mus", "nus"):
            if not isinstance(doc.get(key), list):
                raise InputError(key, "expected a list")
        costs = [_numbers(c, mode, f"costs[{k}]") for k, c in enumerate(doc["costs"])]
        mus = [measure_from_json(m, mode, f"mus[{k}]") for k, m in enumerate(doc["mus"])]
        nus = [measure_from_json(m, mode, f"nus[{k}]") for k, m in enumerate(doc["nus"])]
        return Family.tabulated(grid, costs, mus, nus)
    raise InputError("generator", f"unknown generator {gen!r}")


def cmd_sweep(args) -> int:
    doc = _load_object(args.input)
    mode = read_mode(doc, args.mode)
    family = _family_from_json(doc, mode, args.grid)
    result = sweep(family, mode=mode)
    rows = [(r.t, r.cost, r.gap, r.plan_hash) for r in result.rows]
    _emit(csv_text(["t", "K", "gap", "plan_hash"], rows), args.out)
    return EXIT_OK


def cmd_disintegrate(args) -> int:
    doc = _load_object(args.input)
    mode = read_mode(doc, args.mode)
    mu = measure_from_json(doc.get("measure"), mode, "measure")
    fmap = doc.get("map")
    if not isinstance(fmap, list) or len(fmap) != len(mu):
        raise InputError("map", f"expected a list of {len(mu)} image indices")
    if any(y is not None and (isinstance(y, bool) or not isinstance(y, int)) for y in fmap):
        raise InputError("map", "image indices must be integers or null")
    target = space_from_json(doc["target"], mode, "target") if "target" in doc else None
    d = disintegrate(mu, fmap, target)
    out = {
        "base": num.format_array(d.base.weights),
        "conditionals": {str(y): num.format_array(c.weights) for y, c in sorted(d.conditionals.items())},
    }
    if args.n is not None:
        scheme = PartitionScheme.for_space(d.base.space)
        seq = conditional_sequence(mu, fmap, scheme, args.n, d.base.space)
        out["level"] = args.n
        out["level_conditionals"] = {str(y): num.format_array(w) for y, w in sorted(seq.items())}
    _emit(dumps(out), args.out)
    return EXIT_OK


def cmd_glue(args) -> int:
    doc = _load_object(args.input)
    mode = read_mode(doc, args.mode)
    mu12 = joint_from_json(doc.get("mu12"), mode, "mu12")
    mu23 = joint_from_json(doc.get("mu23"), mode, "mu23")
    eta = glue(mu12, mu23)
    _emit(dumps({"shape": list(eta.space.shape), "weights": num.format_array(eta.matrix())}), args.out)
    return EXIT_OK


def cmd_quantile(args) -> int:
    doc = _load_object(args.input)
    mode = read_mode(doc, args.mode)
    if "sequence" in doc:
        seq = doc["sequence"]
        if not isinstance(seq, list) or not seq:
            raise InputError("sequence", "expected a nonempty list of measures")
        mus = [measure_from_json(m, mode, f"sequence[{k}]") for k, m in enumerate(seq)]
        limit = measure_from_json(doc.get("limit"), mode, "limit")
        rep = skorohod_sequence(mus, limit)
        _emit(csv_text(["n", "d0", "W1"], rep.rows()), args.out)
        return EXIT_OK
    mu = measure_from_json(doc.get("measure", doc), mode, "measure")
    q = quantile_map(mu)
    _emit(dumps({"breakpoints": num.format_array(_arr(q.breakpoints)),
                 "values": num.format_array(_arr(q.values))}), args.out)
    return EXIT_OK


def _arr(values):
    out = np.empty(len(values), dtype=object)
    out[:] = list(values)
    return out


COMMANDS = {
    "solve": (cmd_solve, "solve one Kantorovich instance"),
    "check": (cmd_check, "run a seeded certification suite"),
    "sweep": (cmd_sweep, "solve a parametric family and write t,K,gap,plan_hash CSV"),
    "disintegrate": (cmd_disintegrate, "conditional measures of a joint measure along a map"),
    "glue": (cmd_glue, "glue two couplings along their shared middle marginal"),
    "quantile": (cmd_quantile, "quantile map of a measure on the line, or a d0/W1 sequence report"),
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="parakant", description="Parametric discrete optimal transport.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, (_, help_text) in COMMANDS.items():
        p = sub.add_parser(name, help=help_text)
        if name != "check":
            p.add_argument("input", help="input JSON file ('-' for stdin)")
        p.add_argument("--mode", choices=num.MODES, default=None,
                       help="arithmetic (default: from the input, else rational)")
        p.add_argument("--out", default=None, help="output file (default: stdout)")
        p.add_argument("--seed", type=int, default=0, help="RNG seed for check suites")
        p.add_argument("--n", type=int, default=None, help="ladder/truncation depth or partition level")
        if name == "check":
            p.add_argument("--suite", required=True, help=", ".join(SUITES))
            p.add_argument("--sizes", default=None, help="COUNT or COUNT:MAXDIM")
        if name == "sweep":
            p.add_argument("--grid", default=None, help="a:b:k or comma-separated values")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code else EXIT_OK
    if args.seed < 0 or args.seed >= 2 ** 64:
        print("error: --seed must be a 64-bit unsigned integer", file=sys.stderr)
        return EXIT_INPUT
    handler = COMMANDS[args.command][0]
    try:
        return handler(args)
    except (InputError, MeasureError, SolverError, ParametricError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except Exception as exc:  # noqa: BLE001
        print(f"internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
