"""Hypothesis checks of the invariants on small exact instances."""

from fractions import Fraction as F

import numpy as np
from hypothesis import given, settings
from hypothesis import strategies as st

from parakant import (DiscreteMeasure, FiniteMetricSpace, ProductSpace, d0_distance, disintegrate, glue,
                      inf_convolution, lipschitz_slack, normalize_potentials, project, quantile_coupling,
                      quantile_map, solve_exact, truncate_normalize, tv_distance)
from parakant.skorohod import line_cost

SETTINGS = settings(max_examples=60, deadline=None)


@st.composite
def weights(draw, n=None, max_n=5):
    n = n or draw(st.integers(1, max_n))
    raw = draw(st.lists(st.integers(0, 9), min_size=n, max_size=n))
    if sum(raw) == 0:
        raw[draw(st.integers(0, n - 1))] = 1
    s = sum(raw)
    return [F(x, s) for x in raw]


@st.composite
def measures(draw, n=None, max_n=5):
    w = draw(weights(n, max_n))
    return DiscreteMeasure(FiniteMetricSpace.discrete(len(w)), w)


@st.composite
def costs(draw, m, n, top=1):
    return [[F(draw(st.integers(0, 12)), 12) * top for _ in range(n)] for _ in range(m)]


@st.composite
def instances(draw, max_n=5):
    mu, nu = draw(measures(max_n=max_n)), draw(measures(max_n=max_n))
    return draw(costs(len(mu), len(nu))), mu, nu


@st.composite
def line_measures(draw, max_n=5):
    xs = draw(st.lists(st.integers(-40, 40), min_size=1, max_size=max_n, unique=True))
    w = draw(weights(len(xs)))
    return DiscreteMeasure.on_line([F(x, 4) for x in xs], w)


@SETTINGS
@given(instances())
def test_plan_is_a_coupling(inst):
    h, mu, nu = inst
    plan = solve_exact(h, mu, nu).plan.matrix
    assert list(plan.sum(axis=1)) == list(mu.weights)
    assert list(plan.sum(axis=0)) == list(nu.weights)
    assert all(x >= 0 for x in plan.flat)


@SETTINGS
@given(instances())
def test_complementary_slackness(inst):
    h, mu, nu = inst
    res = solve_exact(h, mu, nu)
    phi, psi = res.potentials.phi, res.potentials.psi
    for (i, j), x in np.ndenumerate(res.plan.matrix):
        assert phi[i] + psi[j] <= h[i][j]
        if x > 0:
            assert phi[i] + psi[j] == h[i][j]
    assert res.gap == 0


@SETTINGS
@given(instances())
def test_transpose_symmetry(inst):
    h, mu, nu = inst
    ht = [list(r) for r in zip(*h)]
    assert solve_exact(h, mu, nu).cost == solve_exact(ht, nu, mu).cost


@SETTINGS
@given(instances(), st.integers(1, 5))
def test_cost_is_homogeneous(inst, c):
    h, mu, nu = inst
    a, b = solve_exact(h, mu, nu), solve_exact([[c * x for x in r] for r in h], mu, nu)
    assert b.cost == c * a.cost
    assert b.plan.digest() == a.plan.digest()


@SETTINGS
@given(instances(), st.integers(0, 12))
def test_constant_shift(inst, k):
    h, mu, nu = inst
    shifted = [[x + F(k, 12) for x in r] for r in h]
    assert solve_exact(shifted, mu, nu).cost == solve_exact(h, mu, nu).cost + F(k, 12)


@SETTINGS
@given(st.data())
def test_tv_lipschitz(data):
    m, n = data.draw(st.integers(1, 4)), data.draw(st.integers(1, 4))
    h = data.draw(costs(m, n))
    mu1, mu2 = data.draw(measures(m)), data.draw(measures(m))
    nu1, nu2 = data.draw(measures(n)), data.draw(measures(n))
    assert lipschitz_slack(h, mu1, nu1, mu2, nu2) >= 0


@SETTINGS
@given(instances())
def test_normalized_potentials_in_box(inst):
    h, mu, nu = inst
    res = solve_exact(h, mu, nu)
    p = normalize_potentials(res.potentials, h)
    assert max(p.phi) == 1 and min(p.phi) >= 0
    assert min(p.psi) >= -1 and max(p.psi) <= 0
    assert p.objective(mu, nu) == res.cost


@SETTINGS
@given(measures(max_n=7), st.integers(1, 10))
def test_truncation_tv_bound(mu, n):
    mun, kept = truncate_normalize(mu, n)
    eps = F(1, 2 ** n)
    assert tv_distance(mu, mun) <= 2 * eps / (1 - eps)
    assert set(kept) <= set(mu.support)


@SETTINGS
@given(st.lists(st.integers(0, 20), min_size=1, max_size=5), st.lists(st.integers(-5, 5), min_size=1,
                                                                        max_size=5, unique=True))
def test_inf_convolution_ladder(hraw, xs):
    k = min(len(hraw), len(xs))
    space = FiniteMetricSpace.line(xs[:k])
    h = np.array([F(v, 4) for v in hraw[:k]], dtype=object)
    prev = None
    for n in range(1, 8):
        hn = inf_convolution(h, space, n)
        assert all(a <= b for a, b in zip(hn, h))
        if prev is not None:
            assert all(a <= b for a, b in zip(prev, hn))
        for i in range(k):
            for j in range(k):
                assert abs(hn[i] - hn[j]) <= n * space.dist[i, j]
        prev = hn


@SETTINGS
@given(st.data())
def test_disintegration_reconstructs(data):
    m, n = data.draw(st.integers(1, 4)), data.draw(st.integers(1, 4))
    w = data.draw(weights(m * n))
    joint = DiscreteMeasure(ProductSpace(FiniteMetricSpace.discrete(m), FiniteMetricSpace.discrete(n)), w)
    f = data.draw(st.lists(st.integers(0, 3), min_size=m * n, max_size=m * n))
    d = disintegrate(joint, f)
    assert d.reconstruct() == joint
    assert d.is_proper()


@SETTINGS
@given(st.data())
def test_glue_faces(data):
    dims = [data.draw(st.integers(1, 3)) for _ in range(3)]
    spaces = [FiniteMetricSpace.discrete(k) for k in dims]
    triple = DiscreteMeasure(ProductSpace(*spaces), data.draw(weights(dims[0] * dims[1] * dims[2])))
    mu12, mu23 = project(triple, (0, 1)), project(triple, (1, 2))
    eta = glue(mu12, mu23)
    assert project(eta, (0, 1)) == mu12
    assert project(eta, (1, 2)) == mu23


@SETTINGS
@given(line_measures())
def test_quantile_pushforward(mu):
    law = quantile_map(mu).pushforward_lebesgue()
    xs = mu.space.coords[:, 0]
    assert {xs[i]: mu.weights[i] for i in mu.support} == law


@SETTINGS
@given(line_measures(), line_measures())
def test_quantile_coupling_is_optimal(mu, nu):
    c = line_cost(mu, nu)
    assert quantile_coupling(mu, nu).integrate(c.ravel()) == solve_exact(c, mu, nu).cost


@SETTINGS
@given(line_measures(), line_measures(), line_measures())
def test_d0_triangle(a, b, c):
    qa, qb, qc = quantile_map(a), quantile_map(b), quantile_map(c)
    assert d0_distance(qa, qc) <= d0_distance(qa, qb) + d0_distance(qb, qc)
    assert 0 <= d0_distance(qa, qb) <= 1
