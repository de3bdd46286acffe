"""Seeded randomized certification suites.

Every suite draws instances from ``numpy.random.default_rng(seed)`` (PCG64),
so a (suite, seed, sizes, mode) tuple always yields the same report.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from . import _numeric as num
from ._numeric import FLOAT, RATIONAL
from .disintegration import (PartitionScheme, conditional_sequence, disintegrate, glue,
                             stabilization_level)
from .measures import DiscreteMeasure, FiniteMetricSpace, ProductSpace, project, tv_distance
from .parametric import Certificate, lipschitz_slack, monotone_cost_limit, truncation_convergence
from .polytope import enumerate_optimal_plans
from .skorohod import (d0_distance, line_cost, quantile_coupling, quantile_map, skorohod_sequence,
                       truncated_w1)
from .solver import CostMatrix, normalize_potentials, solve_exact

DENOM = 12


@dataclass(frozen=True)
class SuiteSpec:
    count: int
    max_dim: int


DEFAULTS = {
    "oracle": SuiteSpec(500, 4),
    "duality": SuiteSpec(200, 10),
    "lipschitz": SuiteSpec(1000, 5),
    "truncation": SuiteSpec(200, 6),
    "monotone": SuiteSpec(200, 4),
    "disintegration": SuiteSpec(200, 5),
    "gluing": SuiteSpec(200, 4),
    "skorohod": SuiteSpec(500, 8),
}
FLOAT_DUALITY = SuiteSpec(1000, 20)
SUITES = tuple(DEFAULTS)


def random_weights(rng, n: int, mode: str, allow_zero: bool = True):
    if mode == FLOAT:
        w = rng.random(n)
        if allow_zero:
            w[rng.random(n) < 0.15] = 0.0
        if w.sum() == 0:
            w[0] = 1.0
        return w / w.sum()
    w = [int(x) for x in rng.integers(0 if allow_zero else 1, DENOM, n)]
    if sum(w) == 0:
        w[0] = 1
    s = sum(w)
    return [Fraction(x, s) for x in w]


def random_measure(rng, space: FiniteMetricSpace, mode: str, allow_zero: bool = True) -> DiscreteMeasure:
    return DiscreteMeasure(space, random_weights(rng, len(space), mode, allow_zero), mode=mode)


def random_cost(rng, m: int, n: int, mode: str, top=1):
    if mode == FLOAT:
        return rng.random((m, n)) * top
    return np.array([[Fraction(int(k), DENOM) for k in row]
                     for row in rng.integers(0, DENOM * top + 1, (m, n))], dtype=object)


def random_line(rng, n: int, lo: int = 0, hi: int = 40, scale: int = 4) -> FiniteMetricSpace:
    pts = sorted(int(v) for v in rng.choice(np.arange(lo, hi), size=n, replace=False))
    order = rng.permutation(n)
    return FiniteMetricSpace.line([Fraction(pts[k], scale) for k in order])


def _dims(rng, max_dim: int) -> tuple[int, int]:
    m, n = rng.integers(1, max_dim + 1, 2)
    return int(m), int(n)


def _tol(mode: str):
    return 0 if mode == RATIONAL else num.OPT_TOL


def _marginal_error(result) -> object:
    plan = result.plan
    row = plan.matrix.sum(axis=1) - plan.mu.weights
    col = plan.matrix.sum(axis=0) - plan.nu.weights
    return max(abs(x) for x in list(row) + list(col))


def suite_oracle(rng, sizes: SuiteSpec, mode: str, depth: int):
    tol = _tol(mode)
    k_eq = Certificate("K_equals_bruteforce", tol)
    canon = Certificate("canonical_plan_is_optimal_vertex", 0)
    feas = Certificate("marginals_match", tol)
    for t in range(sizes.count):
        m, n = _dims(rng, min(sizes.max_dim, 4))
        mu = random_measure(rng, FiniteMetricSpace.discrete(m), mode)
        nu = random_measure(rng, FiniteMetricSpace.discrete(n), mode)
        h = random_cost(rng, m, n, mode, top=2)
        res = solve_exact(h, mu, nu, mode)
        plans = enumerate_optimal_plans(h, mu, nu)
        best = min(p.value for p in plans)
        k_eq.record(-abs(res.cost - best), t)
        match = any(np.all(np.abs(p.matrix - res.plan.matrix) <= tol) for p in plans)
        canon.require(bool(match), t)
        feas.record(-_marginal_error(res), t)
    return [k_eq, canon, feas]


def suite_duality(rng, sizes: SuiteSpec, mode: str, depth: int):
    gap_tol = _tol(mode)
    feas_tol = 0 if mode == RATIONAL else num.FEAS_TOL
    gap_hi = Certificate("gap_upper", gap_tol)
    gap_lo = Certificate("gap_nonnegative", feas_tol)
    dual = Certificate("dual_feasible", feas_tol)
    marg = Certificate("marginals_match", feas_tol)
    for t in range(sizes.count):
        m, n = _dims(rng, sizes.max_dim)
        mu = random_measure(rng, FiniteMetricSpace.discrete(m), mode)
        nu = random_measure(rng, FiniteMetricSpace.discrete(n), mode)
        res = solve_exact(random_cost(rng, m, n, mode), mu, nu, mode)
        gap_hi.record(-res.gap, t)
        gap_lo.record(res.gap, t)
        dual.record(-res.potentials.violation(res.plan.cost), t)
        marg.record(-_marginal_error(res), t)
    return [gap_hi, gap_lo, dual, marg]


def suite_lipschitz(rng, sizes: SuiteSpec, mode: str, depth: int):
    lip = Certificate("tv_lipschitz", num.OPT_TOL)
    norm_obj = Certificate("normalize_keeps_objective", num.OPT_TOL)
    norm_box = Certificate("normalize_bounds_and_feasible", num.FEAS_TOL)
    for t in range(sizes.count):
        m, n = _dims(rng, sizes.max_dim)
        X, Y = FiniteMetricSpace.discrete(m), FiniteMetricSpace.discrete(n)
        h = random_cost(rng, m, n, mode)
        mu1, mu2 = random_measure(rng, X, mode), random_measure(rng, X, mode)
        nu1, nu2 = random_measure(rng, Y, mode), random_measure(rng, Y, mode)
        lip.record(lipschitz_slack(h, mu1, nu1, mu2, nu2), t)
        if t % 4 == 0:
            res = solve_exact(h, mu1, nu1, mode)
            hm = CostMatrix(h)
            np_ = normalize_potentials(res.potentials, hm)
            norm_obj.record(np_.objective(mu1, nu1) - res.potentials.objective(mu1, nu1), t)
            box = min([min(np_.phi), 1 - max(np_.phi), min(np_.psi) + 1, -max(np_.psi)])
            norm_box.record(min(box, -np_.violation(hm)), t)
    return [lip, norm_obj, norm_box]


def suite_truncation(rng, sizes: SuiteSpec, mode: str, depth: int):
    out = Certificate("truncation_tv_bound_and_stabilization", num.OPT_TOL)
    for t in range(sizes.count):
        m, n = _dims(rng, sizes.max_dim)
        mu = random_measure(rng, FiniteMetricSpace.discrete(m), mode)
        nu = random_measure(rng, FiniteMetricSpace.discrete(n), mode)
        cert = truncation_convergence(random_cost(rng, m, n, mode), mu, nu, range(1, depth + 1))
        out.checks += cert.checks
        out.failures += [(t, f) for f in cert.failures]
        if out.min_slack is None or cert.min_slack < out.min_slack:
            out.min_slack = cert.min_slack
    return [out]


def suite_monotone(rng, sizes: SuiteSpec, mode: str, depth: int):
    results = []
    for kind in ("inf_convolution", "truncation"):
        agg = Certificate(f"monotone_{kind}", num.OPT_TOL)
        for t in range(sizes.count if kind == "inf_convolution" else max(1, sizes.count // 4)):
            m, n = _dims(rng, sizes.max_dim)
            X, Y = random_line(rng, m), random_line(rng, n)
            mu, nu = random_measure(rng, X, mode), random_measure(rng, Y, mode)
            h = random_cost(rng, m, n, mode, top=3)
            cert = monotone_cost_limit(h, mu, nu, kind=kind, n_max=depth if kind == "truncation" else None)
            agg.checks += cert.checks
            agg.failures += [(t, f) for f in cert.failures]
            if agg.min_slack is None or cert.min_slack < agg.min_slack:
                agg.min_slack = cert.min_slack
        results.append(agg)
    return results


def suite_disintegration(rng, sizes: SuiteSpec, mode: str, depth: int):
    tol = 0 if mode == RATIONAL else num.FEAS_TOL
    recon = Certificate("reconstruction", tol)
    proper = Certificate("properness", 0)
    stab = Certificate("conditional_sequence_stabilizes", tol)
    plan = Certificate("plan_reintegration_exact", tol)
    for t in range(sizes.count):
        m, n = _dims(rng, sizes.max_dim)
        X, Y = FiniteMetricSpace.discrete(m), random_line(rng, n)
        joint = random_measure(rng, ProductSpace(X, Y), mode)
        f = joint.space.projection(1)
        d = disintegrate(joint, f, Y)
        recon.record(-tv_distance(d.reconstruct(), joint), t)
        proper.require(d.is_proper(), t)
        scheme = PartitionScheme.for_space(Y)
        level = stabilization_level(joint, f, scheme, Y)
        for lv in (level, level + 1):
            seq = conditional_sequence(joint, f, scheme, lv, Y)
            err = max(max(abs(a - b) for a, b in zip(seq[y], d.conditional(y).weights))
                      for y in d.conditionals)
            stab.record(-err, (t, lv))
        # disintegrate an optimal plan along Y and put it back together
        mu, nu = project(joint, (0,)), project(joint, (1,))
        res = solve_exact(random_cost(rng, m, n, mode), mu, nu, mode)
        sigma = res.plan.as_measure()
        back = disintegrate(sigma, sigma.space.projection(1), Y).reconstruct()
        same = back.weights.dtype == sigma.weights.dtype and bool(np.all(back.weights == sigma.weights))
        if mode == RATIONAL:
            plan.require(same, t)
        else:
            plan.record(-tv_distance(back, sigma), t)
    return [recon, proper, stab, plan]


def suite_gluing(rng, sizes: SuiteSpec, mode: str, depth: int):
    tol = 0 if mode == RATIONAL else num.FEAS_TOL
    face12 = Certificate("projection_12", tol)
    face23 = Certificate("projection_23", tol)
    for t in range(sizes.count):
        dims = [int(v) for v in rng.integers(1, sizes.max_dim + 1, 3)]
        spaces = [FiniteMetricSpace.discrete(k) for k in dims]
        triple = random_measure(rng, ProductSpace(*spaces), mode)
        # faces of a random triple, taken as image measures of its disintegrations
        p12 = ProductSpace(spaces[0], spaces[1])
        p23 = ProductSpace(spaces[1], spaces[2])
        idx = [triple.space.unravel(k) for k in range(len(triple))]
        mu12 = disintegrate(triple, [p12.index(a, b) for a, b, _ in idx], p12).base
        mu23 = disintegrate(triple, [p23.index(b, c) for _, b, c in idx], p23).base
        eta = glue(mu12, mu23)
        face12.record(-tv_distance(project(eta, (0, 1)), mu12), t)
        face23.record(-tv_distance(project(eta, (1, 2)), mu23), t)
    return [face12, face23]


def _law(mu: DiscreteMeasure) -> dict:
    xs = mu.space.coords[:, 0]
    return {xs[i]: mu.weights[i] for i in mu.support}


def _relabel(mu: DiscreteMeasure, rng) -> DiscreteMeasure:
    """Same law on a permuted copy of the point set."""
    perm = rng.permutation(len(mu))
    xs = mu.space.coords[:, 0]
    return DiscreteMeasure.on_line([xs[k] for k in perm], [mu.weights[k] for k in perm])


def _grid_measure(n: int) -> DiscreteMeasure:
    return DiscreteMeasure.on_line([Fraction(k, n) for k in range(n)], [Fraction(1, n)] * n)


def skorohod_families(levels: int = 6, diracs: int = 128):
    """The two convergent families: ``delta_{1/n} -> delta_0`` and dyadic grids refining."""
    diracs = [DiscreteMeasure.on_line([Fraction(1, n)], [1]) for n in range(1, diracs + 1)]
    grids = [_grid_measure(2 ** k) for k in range(levels)]
    return (diracs, DiscreteMeasure.on_line([0], [1])), (grids, _grid_measure(2 ** levels))


def suite_skorohod(rng, sizes: SuiteSpec, mode: str, depth: int):
    tol = 0 if mode == RATIONAL else num.FEAS_TOL
    push = Certificate("lebesgue_pushforward", tol)
    mono = Certificate("monotone_coupling_optimal", num.OPT_TOL)
    semi = Certificate("d0_semimetric", tol)
    bound = Certificate("d0_dominates_truncated_w1", num.OPT_TOL)
    for t in range(sizes.count):
        n = int(rng.integers(1, sizes.max_dim + 1))
        mu = random_measure(rng, random_line(rng, n, -20, 20), mode)
        q = quantile_map(mu)
        law = q.pushforward_lebesgue()
        xs = list(mu.space.coords[:, 0])
        err = max(abs(law.get(xs[i], 0) - mu.weights[i]) for i in range(n))
        push.record(-err, t)
        if t % 2 == 0:
            m = int(rng.integers(1, sizes.max_dim + 1))
            nu = random_measure(rng, random_line(rng, m, -20, 20), mode)
            k = solve_exact(line_cost(mu, nu), mu, nu, mode).cost
            coupled = quantile_coupling(mu, nu)
            mono.record(-abs(coupled.integrate(line_cost(mu, nu).ravel()) - k), t)
            qn = quantile_map(nu)
            bound.record(d0_distance(q, qn) - truncated_w1(mu, nu), t)
            rho = random_measure(rng, random_line(rng, m, -20, 20), mode)
            qr = quantile_map(rho)
            semi.record(d0_distance(q, qr) + d0_distance(qr, qn) - d0_distance(q, qn), t)
            semi.record(-abs(d0_distance(q, qn) - d0_distance(qn, q)), t)
            semi.require((d0_distance(q, qn) == 0) == (_law(mu) == _law(nu)), t)
            semi.require(d0_distance(q, quantile_map(_relabel(mu, rng))) == 0, t)
    fam = Certificate("convergent_families", 1e-12)
    for seq, limit in skorohod_families():
        rep = skorohod_sequence(seq, limit)
        fam.require(rep.d0_monotone and rep.d0_vanishes and rep.w1_vanishes, "family")
        for a, b in zip(rep.d0, rep.d0[1:]):
            fam.record(a - b, "monotone")
    return [push, mono, semi, bound, fam]


RUNNERS = {
    "oracle": suite_oracle,
    "duality": suite_duality,
    "lipschitz": suite_lipschitz,
    "truncation": suite_truncation,
    "monotone": suite_monotone,
    "disintegration": suite_disintegration,
    "gluing": suite_gluing,
    "skorohod": suite_skorohod,
}


def run_suite(name: str, seed: int = 0, mode: str = RATIONAL, count: int | None = None,
              max_dim: int | None = None, depth: int = 10) -> dict:
    """Run one suite and return its JSON-ready report."""
    if name not in RUNNERS:
        raise KeyError(name)
    base = FLOAT_DUALITY if (name == "duality" and mode == FLOAT) else DEFAULTS[name]
    sizes = SuiteSpec(count if count is not None else base.count,
                      max_dim if max_dim is not None else base.max_dim)
    rng = np.random.default_rng(seed)
    certs = RUNNERS[name](rng, sizes, mode, depth)
    props = [{
        "name": c.name,
        "passed": c.passed,
        "checks": c.checks,
        "worst_slack": c.min_slack,
        "tolerance": c.tolerance,
        "failures": len(c.failures),
    } for c in certs]
    return {
        "suite": name,
        "seed": seed,
        "mode": mode,
        "count": sizes.count,
        "max_dim": sizes.max_dim,
        "depth": depth,
        "properties": props,
        "passed": all(p["passed"] for p in props),
    }


__all__ = ["SUITES", "DEFAULTS", "run_suite", "random_measure", "random_cost", "random_line",
           "skorohod_families"]
