"""Command-line front end.

Inputs are JSON files: ``space.json`` ``{kind, weights}``, ``filtration.json``
``{k_min, partitions}``, ``func.json`` ``{values}`` and ``metric_space.json``
(coordinates or distances plus weights and A0). Scalars are printed with 17
significant digits; arrays are written as JSON, which round-trips doubles.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from .atomic import stopping_time_decomposition
from .dyadic_geometry import (
    DyadicSystem,
    QuasiMetricSpace,
    build_adjacent_systems,
    build_dyadic_system,
    cover_ball,
    verify_system,
)
from .function_norms import NormVariant, norm
from .martingale_ops import expand, paraproducts
from .measure_space import Filtration, MeasureSpace, as_func, load_json, validate_filtration
from .verify import SUITES, reports_to_csv, run_suite

CONFIG_KEYS = {
    "space",
    "filtration",
    "func",
    "f",
    "g",
    "metric",
    "system",
    "suites",
    "suite_params",
    "seed",
    "trials",
    "format",
    "out",
}


class CommandError(Exception):
    pass


def fmt(x: float) -> str:
    return "%.17g" % x


def load_config(path: str | None) -> dict:
    if path is None:
        return {}
    data = load_json(path)
    if not isinstance(data, dict):
        raise CommandError(f"{path}: config must be a JSON object")
    unknown = set(data) - CONFIG_KEYS
    if unknown:
        raise CommandError(f"{path}: unknown config keys {sorted(unknown)}")
    return data


def _pick(args, cfg: dict, name: str, default=None):
    v = getattr(args, name, None)
    if v is not None:
        return v
    return cfg.get(name, default)


def _need(args, cfg, name):
    v = _pick(args, cfg, name)
    if v is None:
        raise CommandError(f"missing --{name.replace('_', '-')} (or '{name}' in the config)")
    return v


def _space(args, cfg) -> MeasureSpace:
    return MeasureSpace.from_json(load_json(_need(args, cfg, "space")))


def _filtration(args, cfg, space) -> Filtration:
    filt = Filtration.from_json(load_json(_need(args, cfg, "filtration")), space.n)
    report = validate_filtration(space, filt)
    if not report.ok:
        raise CommandError("filtration: " + "; ".join(report.violations))
    return filt


def _func(args, cfg, space, name="func") -> np.ndarray:
    path = _need(args, cfg, name)
    data = load_json(path)
    if "values" not in data:
        raise CommandError(f"{path}: function JSON needs a 'values' field")
    try:
        return as_func(space, data["values"])
    except ValueError as exc:
        raise CommandError(f"{path}: {exc}") from None


def _metric(args, cfg) -> QuasiMetricSpace:
    return QuasiMetricSpace.from_json(load_json(_need(args, cfg, "metric")))


def _emit(args, cfg, payload, name: str):
    """Print JSON or write it to ``<out>/<name>``."""
    text = json.dumps(payload, sort_keys=True)
    out = _pick(args, cfg, "out")
    if out:
        os.makedirs(out, exist_ok=True)
        with open(os.path.join(out, name), "w") as fh:
            fh.write(text + "\n")
    print(text)


# ---------------------------------------------------------------------------
# commands


def cmd_space_validate(args, cfg) -> int:
    space = _space(args, cfg)
    print(json.dumps({"ok": True, "n": space.n, "kind": space.kind, "total": space.total}))
    return 0


def cmd_filtration_validate(args, cfg) -> int:
    space = _space(args, cfg)
    filt = Filtration.from_json(load_json(_need(args, cfg, "filtration")), space.n)
    report = validate_filtration(space, filt)
    print(json.dumps(report.to_json()))
    return 0 if report.ok else 1


def cmd_norm(args, cfg) -> int:
    space = _space(args, cfg)
    filt = _filtration(args, cfg, space)
    f = _func(args, cfg, space)
    print(fmt(norm(space, filt, f, args.variant, args.p, args.q)))
    return 0


def cmd_expand(args, cfg) -> int:
    space = _space(args, cfg)
    filt = _filtration(args, cfg, space)
    exp = expand(space, filt, _func(args, cfg, space), zero_base=not args.true_base)
    payload = {"levels": list(exp.levels), "values": exp.values.tolist(), "differences": exp.diffs.tolist()}
    _emit(args, cfg, payload, "expansion.json")
    return 0


def cmd_paraproduct(args, cfg) -> int:
    space = _space(args, cfg)
    filt = _filtration(args, cfg, space)
    f = _func(args, cfg, space, "f")
    g = _func(args, cfg, space, "g")
    p1, p2, p3 = paraproducts(space, filt, f, g)
    _emit(args, cfg, {"pi1": p1.tolist(), "pi2": p2.tolist(), "pi3": p3.tolist()}, "paraproducts.json")
    return 0


def cmd_atoms(args, cfg) -> int:
    space = _space(args, cfg)
    filt = _filtration(args, cfg, space)
    f = _func(args, cfg, space)
    try:
        dec = stopping_time_decomposition(space, filt, f, args.p, args.q)
    except ValueError as exc:
        raise CommandError(f"atoms decompose: {exc}") from None
    _emit(args, cfg, {"quasi_norm": dec.quasi_norm(), "terms": dec.to_json()}, "atoms.json")
    return 0


def cmd_dyadic_build(args, cfg) -> int:
    space = _metric(args, cfg)
    try:
        system = build_dyadic_system(space, args.delta, args.c0, args.C0, seed=_pick(args, cfg, "seed"))
    except ValueError as exc:
        raise CommandError(f"dyadic build: {exc}") from None
    _emit(args, cfg, system.to_json(), "dyadic_system.json")
    return 0


def cmd_dyadic_verify(args, cfg) -> int:
    space = _metric(args, cfg)
    system = DyadicSystem.from_json(load_json(_need(args, cfg, "system")))
    report = verify_system(space, system)
    print(json.dumps(report.to_json()))
    return 0 if report.ok else 1


def _adjacent(args, cfg, space):
    seed = _pick(args, cfg, "seed", 0)
    seeds = [int(seed) + t for t in range(args.K)]
    try:
        return build_adjacent_systems(space, args.delta, args.K, args.c0, args.C0, seeds=seeds, C_target=args.C_target, backend=args.backend)
    except ValueError as exc:
        raise CommandError(f"adjacent build: {exc}") from None


def cmd_adjacent_build(args, cfg) -> int:
    space = _metric(args, cfg)
    adj = _adjacent(args, cfg, space)
    payload = {"K": adj.K, "C": adj.C, "witnesses": [list(w) for w in adj.witnesses], "systems": [s.to_json() for s in adj.systems]}
    _emit(args, cfg, payload, "adjacent_systems.json")
    return 0


def cmd_cover_ball(args, cfg) -> int:
    space = _metric(args, cfg)
    if not 0 <= args.x < space.n:
        raise CommandError(f"cover-ball: center {args.x} outside 0..{space.n - 1}")
    adj = _adjacent(args, cfg, space)
    c = cover_ball(adj, args.x, args.r)
    print(json.dumps({"t": c.t, "level": c.level, "cube": c.cube, "diameter": c.diameter, "members": list(c.members)}))
    return 0


def cmd_verify(args, cfg) -> int:
    suites = args.suite or cfg.get("suites") or []
    if suites == ["all"] or suites == "all":
        suites = sorted(SUITES)
    if not suites:
        raise CommandError("verify: name at least one --suite (or 'all')")
    params = cfg.get("suite_params", {})
    reports = []
    for sid in suites:
        conf = dict(params.get(sid, {}))
        for key in ("seed", "trials"):
            v = _pick(args, cfg, key)
            if v is not None:
                conf[key] = int(v)
        try:
            reports.append(run_suite(sid, conf))
        except ValueError as exc:
            raise CommandError(f"verify {sid}: {exc}") from None
    form = _pick(args, cfg, "format", "json")
    out = _pick(args, cfg, "out")
    if form == "csv":
        text = reports_to_csv(reports)
    else:
        text = "\n".join(r.dumps() for r in reports) + "\n"
    if out:
        os.makedirs(out, exist_ok=True)
        for r in reports:
            with open(os.path.join(out, f"{r.suite}.json"), "w") as fh:
                fh.write(r.dumps() + "\n")
        if form == "csv":
            with open(os.path.join(out, "reports.csv"), "w") as fh:
                fh.write(text)
    sys.stdout.write(text)
    for r in reports:
        status = "PASS" if r.passed else "FAIL"
        print(f"{status} {r.suite} sup_ratio={fmt(r.sup_ratio)}", file=sys.stderr)
    return 0 if all(r.passed for r in reports) else 1


# ---------------------------------------------------------------------------
# parser


def _common(p: argparse.ArgumentParser):
    p.add_argument("--config", help="JSON config; unknown keys are rejected")
    p.add_argument("--seed", type=int)
    p.add_argument("--trials", type=int)
    p.add_argument("--format", choices=("json", "csv"))
    p.add_argument("--out", help="directory for output files")


def _tree_inputs(p, funcs=("func",)):
    p.add_argument("--space")
    p.add_argument("--filtration")
    for name in funcs:
        p.add_argument(f"--{name}")


def _geometry(p, delta=1 / 12):
    p.add_argument("--metric", help="metric_space.json")
    p.add_argument("--delta", type=float, default=delta)
    p.add_argument("--c0", type=float, default=1.0)
    p.add_argument("--C0", type=float, default=1.0)


def _adjacent_args(p):
    p.add_argument("--K", type=int, default=8)
    p.add_argument("--C-target", dest="C_target", type=float)
    p.add_argument("--backend", choices=("metric", "euclidean"), default="metric")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="martpara", description="Martingale paraproducts, Hardy-type norms and dyadic systems.")
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, fn, **kw):
        p = sub.add_parser(name, **kw)
        _common(p)
        p.set_defaults(fn=fn)
        return p

    def group(name):
        g = sub.add_parser(name).add_subparsers(dest="action", required=True)

        def add_action(action, fn):
            p = g.add_parser(action)
            _common(p)
            p.set_defaults(fn=fn)
            return p

        return add_action

    space = group("space")
    _tree_inputs(space("validate", cmd_space_validate), ())
    filt = group("filtration")
    _tree_inputs(filt("validate", cmd_filtration_validate), ())

    p = add("norm", cmd_norm)
    _tree_inputs(p)
    p.add_argument("--variant", required=True, choices=[v.value for v in NormVariant])
    p.add_argument("--p", type=float, default=1.0)
    p.add_argument("--q", type=int, default=1)

    p = add("expand", cmd_expand)
    _tree_inputs(p)
    p.add_argument("--true-base", action="store_true", help="keep E f at the first level instead of 0")

    _tree_inputs(add("paraproduct", cmd_paraproduct), ("f", "g"))

    atoms = group("atoms")
    p = atoms("decompose", cmd_atoms)
    _tree_inputs(p)
    p.add_argument("--p", type=float, default=1.0)
    p.add_argument("--q", type=float, default=2.0)

    dyadic = group("dyadic")
    _geometry(dyadic("build", cmd_dyadic_build))
    p = dyadic("verify", cmd_dyadic_verify)
    p.add_argument("--metric")
    p.add_argument("--system", help="dyadic_system.json")

    adjacent = group("adjacent")
    p = adjacent("build", cmd_adjacent_build)
    _geometry(p, 1 / 96)
    _adjacent_args(p)

    p = add("cover-ball", cmd_cover_ball)
    _geometry(p, 1 / 96)
    _adjacent_args(p)
    p.add_argument("--x", type=int, required=True)
    p.add_argument("--r", type=float, required=True)

    p = add("verify", cmd_verify)
    p.add_argument("--suite", action="append", help="suite id (repeatable) or 'all'")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config)
        return args.fn(args, cfg)
    except (CommandError, ValueError, OSError) as exc:
        print(f"martpara {args.command}: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
