"""Randomised verification sweeps over generated instances.

Each sweep draws ``count`` instances from its own seeded stream and folds every
individual comparison into a handful of aggregate checks (worst error, number
of violations, first witness).  ``run_suite`` runs all of them and returns a
JSON-ready document whose bytes depend only on the seed and the config.
"""
from __future__ import annotations

import math
from typing import Callable

import numpy as np

from . import generators as gen
from .coarse_maps import expansion_modulus
from .metric_space import ball, growth_profile, validate_metric
from .pipeline import (demonstrate_propmult_gap, verify_corner_lemma, verify_functoriality,
                       verify_homotopy_invariance, verify_identity_law)
from .report import VerificationReport, jsonable
from .roe_matrix import BlockMatrix, operator_norm, propagation, pushforward, schur_constant
from .rotation import (closeness_homotopy, constancy_check, endpoint_check, propagation_bound_check,
                       rotation_matrix, rotation_propagation, t_grid)


class _Tally:
    """Counts violations of one check and keeps the first witness."""

    def __init__(self):
        self.n = 0
        self.bad = 0
        self.worst = None
        self.witness = None

    def see(self, ok: bool, value=None, witness=None, larger_is_worse: bool = True):
        self.n += 1
        if value is not None:
            if self.worst is None:
                self.worst = value
            else:
                self.worst = max(self.worst, value) if larger_is_worse else min(self.worst, value)
        if not ok:
            self.bad += 1
            if self.witness is None:
                self.witness = witness

    def report(self, rep: VerificationReport, name: str, bound=None, detail: str = ""):
        rep.expect(name, self.bad == 0, measured=self.worst, bound=bound,
                   witness=None if self.bad == 0 else {"violations": self.bad, "first": self.witness},
                   detail=detail or f"{self.n} comparisons")


def _space(cfg, rng, hi=None, lo=1):
    return gen.any_space(rng, cfg.space_kinds, lo, hi or cfg.max_points)


def _map(cfg, rng, X, Y):
    return gen.random_map(rng, X, Y, cfg.map_kinds[int(rng.integers(len(cfg.map_kinds)))])


def _d(cfg, rng, cap=None):
    return int(rng.integers(1, min(cfg.max_block_dim, cap or cfg.max_block_dim) + 1))


# 1 -------------------------------------------------------------------------

def sweep_metric(cfg: gen.SuiteConfig, count: int, rng=None) -> VerificationReport:
    rng = cfg.rng("metric") if rng is None else rng
    rep = VerificationReport(title=f"metric spaces ({count})")
    valid, mono, top, nested = _Tally(), _Tally(), _Tally(), _Tally()
    for k in range(count):
        X = _space(cfg, rng)
        valid.see(validate_metric(X).passed, witness=k)
        prof = growth_profile(X)
        vals = [prof[r] for r in sorted(prof)]
        mono.see(all(a <= b for a, b in zip(vals, vals[1:])), witness=k)
        top.see(vals[-1] == len(X), witness=k)
        radii = sorted(prof)
        x = X.labels[int(rng.integers(len(X)))]
        balls = [ball(X, x, r) for r in radii]
        nested.see(all(a <= b for a, b in zip(balls, balls[1:])), witness=(k, x))
    valid.report(rep, "generated spaces pass validate_metric")
    mono.report(rep, "growth profile monotone")
    top.report(rep, "growth profile maximum = |X|")
    nested.report(rep, "balls nested in R")
    return rep


# 2 -------------------------------------------------------------------------

def sweep_products(cfg: gen.SuiteConfig, count: int, rng=None) -> VerificationReport:
    rng = cfg.rng("products") if rng is None else rng
    rep = VerificationReport(title=f"propagation of products ({count})")
    sub = _Tally()
    for k in range(count):
        X = _space(cfg, rng)
        d = _d(cfg, rng)
        m1 = gen.random_matrix(rng, X, d, cfg.density)
        m2 = gen.random_matrix(rng, X, d, cfg.density)
        lhs, rhs = propagation(m1 @ m2), propagation(m1) + propagation(m2)
        sub.see(lhs <= rhs, rhs - lhs, witness=k, larger_is_worse=False)
    sub.report(rep, "prop(m1 m2) <= prop(m1) + prop(m2)", detail="measured = min slack")
    rep.extend(demonstrate_propmult_gap(0.5), prefix="scaled line: ")
    return rep


# 3 -------------------------------------------------------------------------

def sweep_norm(cfg: gen.SuiteConfig, count: int, rng=None) -> VerificationReport:
    rng = cfg.rng("norm") if rng is None else rng
    tol = cfg.tolerances.get("norm", 1e-9)
    rep = VerificationReport(title=f"Schur norm bound ({count})")
    t = _Tally()
    for k in range(count):
        X = _space(cfg, rng)
        m = gen.random_matrix(rng, X, _d(cfg, rng), cfg.density)
        N = schur_constant(X, propagation(m))
        bound = N * m.max_block_norm()
        norm = operator_norm(m)
        t.see(norm <= bound + tol, norm / bound if bound else 0.0, witness=k)
    t.report(rep, "||m|| <= N(X, prop m) * max block norm", bound=1.0,
             detail="measured = worst ratio ||m|| / bound")
    return rep


# 4 -------------------------------------------------------------------------

def sweep_pushforward(cfg: gen.SuiteConfig, count: int, rng=None) -> VerificationReport:
    rng = cfg.rng("pushforward") if rng is None else rng
    atol = cfg.tolerances.get("identity", 1e-12)
    itol = cfg.tolerances.get("isometry", 1e-9)
    rep = VerificationReport(title=f"pushforward ({count})")
    addi, mult, adj, lin, iso, prop = (_Tally() for _ in range(6))
    for k in range(count):
        hi = cfg.max_pushforward_points
        X, Y = _space(cfg, rng, hi), _space(cfg, rng, hi)
        f = _map(cfg, rng, X, Y)
        d = _d(cfg, rng, 2)
        m1 = gen.random_matrix(rng, X, d, cfg.density)
        m2 = gen.random_matrix(rng, X, d, cfg.density)
        c = complex(*rng.standard_normal(2))
        P = lambda m: pushforward(f, m)
        e = P(m1 + m2).distance(P(m1) + P(m2))
        addi.see(e <= atol, e, witness=k)
        e = P(m1 @ m2).distance(P(m1) @ P(m2))
        mult.see(e <= atol, e, witness=k)
        e = P(m1.H).distance(P(m1).H)
        adj.see(e <= atol, e, witness=k)
        e = P(c * m1).distance(c * P(m1))
        lin.see(e <= atol, e, witness=k)
        e = abs(operator_norm(P(m1)) - operator_norm(m1))
        iso.see(e <= itol, e, witness=k)
        M = expansion_modulus(f)(propagation(m1))
        pp = propagation(P(m1))
        prop.see(pp <= M, M - pp, witness=k, larger_is_worse=False)
    addi.report(rep, "f_+(m1 + m2) = f_+m1 + f_+m2", bound=atol)
    mult.report(rep, "f_+(m1 m2) = f_+m1 f_+m2", bound=atol)
    adj.report(rep, "f_+(m*) = (f_+m)*", bound=atol)
    lin.report(rep, "f_+(c m) = c f_+m", bound=atol)
    iso.report(rep, "||f_+m|| = ||m||", bound=itol)
    prop.report(rep, "prop_Y(f_+m) <= modulus(f)(prop m)", detail="measured = min slack")
    return rep


# 5 -------------------------------------------------------------------------

def sweep_rotation(cfg: gen.SuiteConfig, count: int, rng=None) -> VerificationReport:
    rng = cfg.rng("rotation") if rng is None else rng
    ts = t_grid(cfg.t_samples)
    rep = VerificationReport(title=f"rotation paths ({count})")
    orth, zero, signed, prop, lip = (_Tally() for _ in range(5))
    for k in range(count):
        X = _space(cfg, rng, lo=2)
        inv = gen.random_involution(rng, X.labels, cfg.max_moved_points)
        n = len(X)
        Rs = [rotation_matrix(inv, t) for t in ts]
        for t, R in zip(ts, Rs):
            e = float(np.abs(R @ R.T - np.eye(n)).max())
            orth.see(e <= 1e-12, e, witness=(k, t))
        zero.see(np.array_equal(Rs[0], np.eye(n)), witness=k)
        # Rot(1) e_x = +-e_sigma(x)
        R1 = Rs[-1]
        cols_ok = all(abs(abs(R1[inv.sigma[x], x]) - 1.0) == 0.0 and np.count_nonzero(R1[:, x]) == 1
                      for x in range(n))
        signed.see(cols_ok, witness=k)
        expect = rotation_propagation(inv, X)
        moved = inv.moved()
        expect_moved = float(X.dist[moved, inv.sigma[moved]].max()) if moved.size else 0.0
        for t, R in zip(ts, Rs):
            got = propagation(BlockMatrix(X, 1, R))
            want = 0.0 if t == 0.0 else expect_moved
            prop.see(got == want and expect == expect_moved, witness=(k, t, got, want))
        worst = 0.0
        for i in range(len(ts)):
            for j in range(i + 1, len(ts)):
                gap = np.linalg.norm(Rs[i] - Rs[j], 2) - math.pi / 2 * abs(ts[i] - ts[j])
                worst = max(worst, gap)
        lip.see(worst <= 1e-12, worst, witness=k)
    orth.report(rep, "||Rot Rot* - I|| <= 1e-12", bound=1e-12)
    zero.report(rep, "Rot(0) = I exactly")
    signed.report(rep, "Rot(1) is a signed permutation implementing sigma")
    prop.report(rep, "prop(Rot(t)) = max dist(x, sigma x) on (0,1], 0 at t=0")
    lip.report(rep, "||Rot(t1) - Rot(t2)|| <= (pi/2)|t1 - t2|",
               detail="measured = worst excess over the Lipschitz bound")
    return rep


# 6 -------------------------------------------------------------------------

def sweep_closeness(cfg: gen.SuiteConfig, count: int, rng=None) -> VerificationReport:
    rng = cfg.rng("closeness") if rng is None else rng
    ts = t_grid(cfg.t_samples)
    atol = cfg.tolerances.get("identity", 1e-12)
    rep = VerificationReport(title=f"closeness homotopy ({count})")
    e0, e1, prop, rot, const = (_Tally() for _ in range(5))
    tested = 0
    for k in range(count):
        hi = cfg.max_pushforward_points
        X, Y = _space(cfg, rng, hi), _space(cfg, rng, hi)
        f = _map(cfg, rng, X, Y)
        g = gen.nearby_map(rng, f)
        m = gen.random_matrix(rng, X, _d(cfg, rng, 2), cfg.density)
        path = closeness_homotopy(f, g, m, ts)
        ends = endpoint_check(path, atol)
        e0.see(ends.checks[0].status == "pass", ends.checks[0].measured, witness=k)
        e1.see(ends.checks[1].status == "pass", ends.checks[1].measured, witness=k)
        pb = propagation_bound_check(path)
        rot.see(pb.checks[0].status == "pass", witness=k)
        prop.see(pb.checks[1].status == "pass", witness=(k, pb.checks[1].witness))
        for y1 in Y.labels:
            for y2 in Y.labels:
                c = constancy_check(path, f, g, y1, y2, atol).checks[0]
                if c.status != "skipped":
                    tested += 1
                    const.see(c.status == "pass", c.measured, witness=(k, y1, y2))
    e0.report(rep, "eta(0) = f_+m exactly", bound=0.0)
    e1.report(rep, "eta(1) = g_+m", bound=atol)
    rot.report(rep, "prop(Rot) <= sup dist(f, g)")
    prop.report(rep, "prop(eta(t)) <= prop(f_+m) + 2 sup dist(f, g)")
    const.report(rep, "blocks meeting the hypothesis are constant in t", bound=atol,
                 detail=f"{tested} blocks met the hypothesis")
    return rep


# 7 -------------------------------------------------------------------------

def sweep_functoriality(cfg: gen.SuiteConfig, count: int, rng=None) -> VerificationReport:
    rng = cfg.rng("functoriality") if rng is None else rng
    ts = t_grid(cfg.t_samples)
    hi = cfg.max_functor_points
    rep = VerificationReport(title=f"functoriality ({count})")
    conj, indep, prop = _Tally(), _Tally(), _Tally()
    for k in range(count):
        X, Y, Z = (_space(cfg, rng, hi) for _ in range(3))
        f, g = _map(cfg, rng, X, Y), _map(cfg, rng, Y, Z)
        m = gen.random_matrix(rng, X, _d(cfg, rng, 2), cfg.density)
        y0 = Y.labels[int(rng.integers(len(Y)))]
        alt = Y.labels[int(rng.integers(len(Y)))]
        r = verify_functoriality(f, g, [m], y0=y0, alt_y0=alt, ts=ts)
        c = r.checks[0]
        conj.see(c.status == "pass", c.measured, witness=(k, y0))
        prop.see(r.checks[1].status == "pass", witness=k)
        if "outcome independent of y0" in r:
            indep.see(r["outcome independent of y0"].status == "pass", witness=(k, y0, alt))
            alt_c = next(ch for ch in r.checks if ch.name.startswith("[y0="))
            conj.see(alt_c.status == "pass", alt_c.measured, witness=(k, alt))
    conj.report(rep, "Rot(1) g_+f_+m Rot(1)* = (g o f)_+m at y0", bound=1e-12)
    prop.report(rep, "propagation bounded along the rotation path")
    indep.report(rep, "outcome independent of y0")
    return rep


def sweep_identity(cfg: gen.SuiteConfig, count: int, rng=None) -> VerificationReport:
    rng = cfg.rng("identity") if rng is None else rng
    ts = t_grid(cfg.t_samples)
    rep = VerificationReport(title=f"identity law ({count})")
    t = _Tally()
    for k in range(count):
        X = _space(cfg, rng, cfg.max_pushforward_points)
        m = gen.random_matrix(rng, X, _d(cfg, rng, 2), cfg.density)
        x0 = X.labels[int(rng.integers(len(X)))]
        r = verify_identity_law(X, [m], x0=x0, ts=ts)
        t.see(r.passed, r.checks[0].measured, witness=(k, x0))
    t.report(rep, "id_+m is rotated onto the corner embedding of m", bound=1e-12)
    return rep


def sweep_corner(cfg: gen.SuiteConfig, count: int, rng=None) -> VerificationReport:
    rng = cfg.rng("corner") if rng is None else rng
    rep = VerificationReport(title=f"corner lemma ({count})")
    for d in range(1, cfg.max_block_dim + 1):
        blocks = [rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d)) for _ in range(count)]
        blocks += [np.zeros((d, d)), np.eye(d)]
        rep.extend(verify_corner_lemma(d, blocks, ts=t_grid(cfg.t_samples)), prefix=f"d={d}: ")
    return rep


# 8 -------------------------------------------------------------------------

def sweep_homotopy(cfg: gen.SuiteConfig, count: int, rng=None) -> VerificationReport:
    rng = cfg.rng("homotopy") if rng is None else rng
    ts = t_grid(cfg.t_samples)
    rep = VerificationReport(title=f"homotopy invariance ({count} + documented instance)")
    tallies: dict = {}

    def fold(r: VerificationReport, k):
        for c in r.checks:
            if c.status == "info":
                continue
            tallies.setdefault(c.name, _Tally()).see(c.status == "pass", witness=(k, c.witness))

    data = gen.documented_homotopy()
    m = gen.random_matrix(rng, data.cylinder.base, 1, 1.0, prop_cap=np.inf)
    r, _ = verify_homotopy_invariance(data, [m], ts=ts)
    fold(r, "documented")
    for k in range(count):
        X = _space(cfg, rng, cfg.max_base_points)
        Y = _space(cfg, rng, cfg.max_target_points)
        data = gen.random_homotopy(rng, X, Y, cfg.max_levels)
        m = gen.random_matrix(rng, X, _d(cfg, rng, 2), cfg.density)
        r, _ = verify_homotopy_invariance(data, [m], ts=ts)
        fold(r, k)
    for name, t in tallies.items():
        t.report(rep, name)
    return rep


SWEEPS: dict[str, Callable] = {
    "metric": sweep_metric,
    "products": sweep_products,
    "norm": sweep_norm,
    "pushforward": sweep_pushforward,
    "rotation": sweep_rotation,
    "closeness": sweep_closeness,
    "functoriality": sweep_functoriality,
    "identity": sweep_identity,
    "corner": sweep_corner,
    "homotopy": sweep_homotopy,
}


def run_suite(cfg: gen.SuiteConfig) -> dict:
    sections = {}
    for name, sweep in SWEEPS.items():
        count = int(cfg.counts.get(name, 0))
        if count <= 0:
            continue
        sections[name] = sweep(cfg, count).to_dict()
    return jsonable({
        "seed": cfg.seed,
        "config": cfg.to_json(),
        "passed": all(s["passed"] for s in sections.values()),
        "sections": sections,
    })


def summary_text(doc: dict) -> str:
    lines = [f"run-suite seed={doc['seed']}"]
    for name, sec in doc["sections"].items():
        bad = [c["name"] for c in sec["checks"] if c["status"] == "fail"]
        lines.append(f"[{'PASS' if sec['passed'] else 'FAIL'}] {sec['title']}"
                     + (f"  failing: {', '.join(bad)}" if bad else ""))
    lines.append("RESULT: " + ("PASS" if doc["passed"] else "FAIL"))
    return "\n".join(lines)
