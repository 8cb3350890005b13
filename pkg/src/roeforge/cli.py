"""Command-line front end.

Exit codes: 0 when every asserted check passes, 1 when one fails, 2 when an
input file cannot be parsed.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import io
from .coarse_maps import closeness_distance, expansion_modulus, fiber_profile
from .cylinder import build_cylinder, inclusions, slice_family, verify_family_properties
from .generators import SuiteConfig, random_matrix
from .metric_space import growth_profile, validate_metric
from .pipeline import verify_homotopy_invariance
from .report import StructuralError, VerificationReport, jsonable
from .roe_matrix import operator_norm, propagation, pushforward, schur_constant
from .rotation import (closeness_homotopy, constancy_check, endpoint_check, propagation_bound_check,
                       rotation_matrix, t_grid)
from .suite import run_suite, summary_text


def _emit(args, rep: VerificationReport, extra: dict | None = None) -> int:
    if args.format == "json":
        doc = rep.to_dict()
        if extra:
            doc.update(jsonable(extra))
        print(json.dumps(doc, indent=2, sort_keys=True))
    else:
        print(rep.to_text())
        for key, value in (extra or {}).items():
            print(f"{key}: {json.dumps(jsonable(value))}")
    return 0 if rep.passed else 1


def cmd_validate_space(args) -> int:
    space = io.load_space(args.file)
    try:
        rep = validate_metric(space)
    except StructuralError as exc:
        raise io.InputError(f"{args.file}: {exc}") from None
    extra = {"growth_profile": growth_profile(space)} if rep.passed else None
    return _emit(args, rep, extra)


def cmd_check_map(args) -> int:
    src = io.load_space(args.source) if args.source else None
    tgt = io.load_space(args.target) if args.target else None
    f = io.load_map(args.map, src, tgt)
    rep = VerificationReport(title="check-map")
    rep.expect("total", True, measured=len(f.values))
    mod = expansion_modulus(f)
    rep.expect("expansion modulus monotone", mod.is_monotone(), measured=mod.table)
    card, diam = fiber_profile(f)
    rep.info("fiber profile", measured={"max_cardinality": card, "max_diameter": diam})
    return _emit(args, rep)


def cmd_check_closeness(args) -> int:
    f = io.load_map(args.f)
    g = io.load_map(args.g, f.source, f.target)
    rep = VerificationReport(title="check-closeness")
    c = closeness_distance(f, g)
    rep.info("closeness distance", measured=c)
    if args.bound is not None:
        rep.expect("closeness distance <= bound", c <= args.bound, measured=c, bound=args.bound)
    return _emit(args, rep)


def cmd_build_cylinder(args) -> int:
    X = io.load_space(args.space)
    p = [int(v) for v in args.p.split(",")] if args.p else [0] * len(X)
    try:
        cyl = build_cylinder(X, p)
    except StructuralError as exc:
        raise io.InputError(f"--p: {exc}") from None
    rep = validate_metric(cyl.space)
    rep.title = "build-cylinder"
    i0, i1 = inclusions(cyl)
    rep.info("inclusion moduli", measured={"i0": expansion_modulus(i0).table,
                                           "i1": expansion_modulus(i1).table})
    if args.output:
        Path(args.output).write_text(json.dumps(cyl.space.to_json(), indent=2))
    return _emit(args, rep, {"cylinder": cyl.space.to_json()} if not args.output else None)


def _family(args):
    data = io.load_homotopy(args.homotopy)
    n_max = args.n_max or 1 + max(data.cylinder.p, default=0)
    try:
        return data, slice_family(data, n_max)
    except ValueError as exc:
        raise io.InputError(f"--n-max: {exc}") from None


def cmd_slice_family(args) -> int:
    data, family = _family(args)
    rep = data.endpoint_report()
    rep.title = "slice-family"
    return _emit(args, rep, {"family": [list(f.values) for f in family]})


def cmd_verify_family(args) -> int:
    data, family = _family(args)
    rep = data.endpoint_report()
    rep.title = "verify-family"
    if rep.passed:
        rep.extend(verify_family_properties(family, data))
    return _emit(args, rep)


def _seed(args) -> int:
    if args.seed is not None:
        return args.seed
    env = os.environ.get("ROEFORGE_SEED")
    if not env:
        return 0
    try:
        return int(env)
    except ValueError:
        raise io.InputError("ROEFORGE_SEED must be an integer") from None


def _samples(args, index, d, count):
    rng = np.random.default_rng(_seed(args))
    return [random_matrix(rng, index, d) for _ in range(count)]


def cmd_verify_pushforward(args) -> int:
    f = io.load_map(args.map)
    m = io.load_matrix(args.matrix)
    others = _samples(args, m.index, m.d, args.samples)
    rep = VerificationReport(title="verify-pushforward")
    P = lambda a: pushforward(f, a)
    for k, other in enumerate([m] + others):
        tag = "m" if k == 0 else f"m{k}"
        rep.expect(f"f_+({tag} m) = f_+{tag} f_+m", P(other @ m).allclose(P(other) @ P(m)),
                   measured=P(other @ m).distance(P(other) @ P(m)), bound=1e-12)
        rep.expect(f"f_+({tag} + m) = f_+{tag} + f_+m", P(other + m).allclose(P(other) + P(m)),
                   measured=P(other + m).distance(P(other) + P(m)), bound=1e-12)
    rep.expect("f_+(m*) = (f_+m)*", P(m.H).allclose(P(m).H), measured=P(m.H).distance(P(m).H),
               bound=1e-12)
    gap = abs(operator_norm(P(m)) - operator_norm(m))
    rep.expect("||f_+m|| = ||m||", gap <= 1e-9, measured=gap, bound=1e-9)
    M = expansion_modulus(f)(propagation(m))
    rep.expect("prop_Y(f_+m) <= modulus(f)(prop m)", propagation(P(m)) <= M,
               measured=propagation(P(m)), bound=M)
    return _emit(args, rep)


def cmd_verify_homotopy(args) -> int:
    f = io.load_map(args.f)
    g = io.load_map(args.g, f.source, f.target)
    m = io.load_matrix(args.matrix)
    path = closeness_homotopy(f, g, m, t_grid(args.samples))
    rep = VerificationReport(title="verify-homotopy")
    rep.extend(endpoint_check(path))
    rep.extend(propagation_bound_check(path))
    tested = 0
    for y1 in f.target.labels:
        for y2 in f.target.labels:
            r = constancy_check(path, f, g, y1, y2)
            if r.checks[0].status != "skipped":
                tested += 1
                if not r.passed:
                    rep.extend(r)
    rep.expect("blocks meeting the constancy hypothesis are constant",
               all(c.name != "block constant in t" for c in rep.failures), measured=tested)
    return _emit(args, rep, {"closeness_distance": closeness_distance(f, g)})


def cmd_verify_chain(args) -> int:
    data = io.load_homotopy(args.homotopy)
    m = io.load_matrix(args.matrix, None) if args.matrix else None
    samples = [m] if m is not None else _samples(args, data.cylinder.base, 1, max(args.count, 1))
    rep, _ = verify_homotopy_invariance(data, samples, args.n_max, t_grid(args.samples))
    return _emit(args, rep)


def cmd_rot_path(args) -> int:
    inv = io.load_involution(args.sigma)
    try:
        R = rotation_matrix(inv, args.t)
    except ValueError as exc:
        raise io.InputError(f"--t: {exc}") from None
    if args.format == "json":
        print(json.dumps({"labels": jsonable(inv.labels), "t": args.t, "matrix": R.tolist()}, indent=2))
    else:
        with np.printoptions(precision=6, suppress=True, linewidth=160):
            print(R)
    return 0


def cmd_matrix_info(args) -> int:
    m = io.load_matrix(args.matrix)
    rep = VerificationReport(title="matrix-info")
    prop = propagation(m)
    norm = operator_norm(m)
    rep.info("propagation", measured=prop)
    rep.info("operator norm", measured=norm)
    rep.info("max block norm", measured=m.max_block_norm())
    if not m.index.inner:
        N = schur_constant(m.index.outer, prop)
        bound = N * m.max_block_norm()
        rep.expect("||m|| <= N * max block norm", norm <= bound + 1e-9,
                   measured=norm, bound=bound, detail=f"N = {N}, slack = {bound - norm:.6g}")
    return _emit(args, rep)


def cmd_run_suite(args) -> int:
    if args.config in (None, "default"):
        cfg = SuiteConfig()
    else:
        try:
            cfg = SuiteConfig.from_json(io.load_json(args.config))
        except ValueError as exc:
            raise io.InputError(f"{args.config}: {exc}") from None
    if args.seed is not None or os.environ.get("ROEFORGE_SEED"):
        cfg.seed = _seed(args)
    doc = run_suite(cfg)
    text = json.dumps(doc, indent=2, sort_keys=True)
    if args.output:
        Path(args.output).write_text(text + "\n")
    # JSON on stdout, summary on stderr; text format puts the summary on stdout alone
    if args.format == "json":
        print(text)
        print(summary_text(doc), file=sys.stderr)
    else:
        print(summary_text(doc))
    return 0 if doc["passed"] else 1


def build_parser() -> argparse.ArgumentParser:
    def formats(p, default="text"):
        p.add_argument("--format", choices=("text", "json"), default=default)

    parser = argparse.ArgumentParser(prog="roeforge",
                                     description="Coarse maps, Roe-type block matrices and their homotopies.")
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")

    def add(name, fn, help_):
        p = sub.add_parser(name, help=help_)
        p.set_defaults(fn=fn)
        if name != "run-suite":
            formats(p)
        return p

    p = add("validate-space", cmd_validate_space, "check the metric axioms of a space file")
    p.add_argument("file")

    p = add("check-map", cmd_check_map, "expansion modulus and fibre profile of a map")
    p.add_argument("map")
    p.add_argument("--source")
    p.add_argument("--target")

    p = add("check-closeness", cmd_check_closeness, "sup distance between two maps")
    p.add_argument("f")
    p.add_argument("g")
    p.add_argument("--bound", type=float)

    p = add("build-cylinder", cmd_build_cylinder, "build the p-cylinder over a space")
    p.add_argument("space")
    p.add_argument("--p", help="comma-separated heights, one per point (default all 0)")
    p.add_argument("--output")

    for name, fn, help_ in (("slice-family", cmd_slice_family, "print the sliced family f_n"),
                            ("verify-family", cmd_verify_family, "check the sliced family's properties")):
        p = add(name, fn, help_)
        p.add_argument("homotopy")
        p.add_argument("--n-max", type=int)

    p = add("verify-pushforward", cmd_verify_pushforward, "*-homomorphism, isometry and propagation checks")
    p.add_argument("--map", required=True)
    p.add_argument("--matrix", required=True)
    p.add_argument("--samples", type=int, default=3, help="extra random matrices")
    p.add_argument("--seed", type=int)

    p = add("verify-homotopy", cmd_verify_homotopy, "closeness homotopy between f_+m and g_+m")
    p.add_argument("--f", required=True)
    p.add_argument("--g", required=True)
    p.add_argument("--matrix", required=True)
    p.add_argument("--samples", type=int, default=21, help="t-grid size")

    p = add("verify-chain", cmd_verify_chain, "chained homotopy for a coarse homotopy file")
    p.add_argument("homotopy")
    p.add_argument("--matrix")
    p.add_argument("--n-max", type=int)
    p.add_argument("--samples", type=int, default=21, help="t-grid size per step")
    p.add_argument("--count", type=int, default=1, help="random matrices when --matrix is absent")
    p.add_argument("--seed", type=int)

    p = add("rot-path", cmd_rot_path, "print Rot_sigma(t)")
    p.add_argument("--sigma", required=True)
    p.add_argument("--t", type=float, required=True)

    p = add("matrix-info", cmd_matrix_info, "propagation, norm and Schur slack of a matrix")
    p.add_argument("matrix")

    p = add("run-suite", cmd_run_suite, "run every verifier over generated instances")
    p.add_argument("--config", default="default")
    p.add_argument("--seed", type=int)
    p.add_argument("--output", help="also write the JSON report here")
    formats(p, default="json")
    return parser


def run(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except io.InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except StructuralError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


def main() -> None:
    sys.exit(run())
