from fractions import Fraction as F

import pytest

from parakant import (DiscreteMeasure, FiniteMetricSpace, MeasureError, QuantileMap, d0_distance,
                      quantile_coupling, quantile_map, skorohod_sequence, solve_exact, truncated_w1)
from parakant.checks import random_line, random_measure, skorohod_families
from parakant.skorohod import line_cost


def on_line(xs, ws):
    return DiscreteMeasure.on_line(xs, ws)


class TestQuantileMap:
    def test_derived_example(self):
        q = quantile_map(on_line([2, 0, 1], [F(1, 2), F(1, 4), F(1, 4)]))
        assert q.breakpoints == (0, F(1, 4), F(1, 2), 1)
        assert q.values == (0, 1, 2)
        assert q.indices == (1, 2, 0)

    def test_right_continuous(self):
        q = quantile_map(on_line([0, 1], [F(1, 3), F(2, 3)]))
        assert q(0) == 0 and q(F(1, 3) - F(1, 10 ** 9)) == 0
        assert q(F(1, 3)) == 1 and q(1) == 1

    def test_zero_weights_dropped(self):
        q = quantile_map(on_line([0, 5, 9], [F(1, 2), 0, F(1, 2)]))
        assert q.values == (0, 9)

    def test_dirac_is_constant(self):
        assert quantile_map(on_line([F(3, 7)], [1])) == QuantileMap((0, 1), (F(3, 7),), (0,))

    def test_pushforward_is_exact(self, rng):
        for _ in range(50):
            mu = random_measure(rng, random_line(rng, int(rng.integers(1, 8)), -20, 20), "rational")
            law = quantile_map(mu).pushforward_lebesgue()
            xs = mu.space.coords[:, 0]
            assert all(law.get(xs[i], 0) == mu.weights[i] for i in range(len(mu)))

    def test_nondecreasing(self):
        q = quantile_map(on_line([3, -1, 2, 0], [F(1, 4)] * 4))
        ts = [F(k, 16) for k in range(17)]
        vals = q.evaluate(ts)
        assert vals == sorted(vals)

    def test_needs_line(self):
        with pytest.raises(MeasureError):
            quantile_map(DiscreteMeasure(FiniteMetricSpace(points=[[0, 0], [1, 1]]), [F(1, 2), F(1, 2)]))

    def test_rejects_out_of_range(self):
        with pytest.raises(ValueError):
            quantile_map(on_line([0], [1]))(F(3, 2))


class TestD0:
    def test_between_diracs(self):
        a, b = quantile_map(on_line([0], [1])), quantile_map(on_line([F(1, 4)], [1]))
        assert d0_distance(a, b) == F(1, 4)

    def test_truncated_at_one(self):
        a, b = quantile_map(on_line([0], [1])), quantile_map(on_line([7], [1]))
        assert d0_distance(a, b) == 1

    def test_derived_two_atoms(self):
        # xi = 0 on [0,1/2), 1 on [1/2,1]; eta = 0 on [0,1/4), 3 on [1/4,1]
        xi = quantile_map(on_line([0, 1], [F(1, 2), F(1, 2)]))
        eta = quantile_map(on_line([0, 3], [F(1, 4), F(3, 4)]))
        assert d0_distance(xi, eta) == F(1, 4) * 1 + F(1, 2) * 1
        # truncated cost [[0, 1], [1, 1]]: only 1/4 can stay put
        assert truncated_w1(on_line([0, 1], [F(1, 2), F(1, 2)]), on_line([0, 3], [F(1, 4), F(3, 4)])) \
            == F(3, 4)

    def test_custom_metric(self):
        a, b = quantile_map(on_line([0], [1])), quantile_map(on_line([F(1, 2)], [1]))
        assert d0_distance(a, b, metric=lambda x, y: 2 * abs(x - y)) == 1


class TestCoupling:
    def test_monotone_and_optimal(self, rng):
        for _ in range(40):
            mu = random_measure(rng, random_line(rng, int(rng.integers(1, 7)), -20, 20), "rational")
            nu = random_measure(rng, random_line(rng, int(rng.integers(1, 7)), -20, 20), "rational")
            c = line_cost(mu, nu)
            coupled = quantile_coupling(mu, nu)
            assert coupled.integrate(c.ravel()) == solve_exact(c, mu, nu).cost
            assert project_ok(coupled, mu, nu)

    def test_derived_example(self):
        mu = on_line([0, 1], [F(1, 2), F(1, 2)])
        nu = on_line([0, 3], [F(1, 4), F(3, 4)])
        assert quantile_coupling(mu, nu).matrix().tolist() == [[F(1, 4), F(1, 4)], [0, F(1, 2)]]


def project_ok(coupled, mu, nu):
    m = coupled.matrix()
    return list(m.sum(axis=1)) == list(mu.weights) and list(m.sum(axis=0)) == list(nu.weights)


class TestSequences:
    def test_diracs_towards_zero(self):
        seq = [on_line([F(1, n)], [1]) for n in range(1, 20)]
        rep = skorohod_sequence(seq, on_line([0], [1]), zero_tol=F(1, 19))
        assert list(rep.d0) == [F(1, n) for n in range(1, 20)]
        assert rep.d0_monotone and rep.d0_vanishes and rep.agree

    def test_built_in_families(self):
        for seq, limit in skorohod_families():
            rep = skorohod_sequence(seq, limit)
            assert rep.d0_monotone and rep.d0_vanishes and rep.w1_vanishes

    def test_grids_derived(self):
        # first member is delta_0, limit is uniform on k/16: mean of k/16 over k < 16
        grids, limit = skorohod_families(levels=4)[1]
        rep = skorohod_sequence(grids, limit)
        assert rep.d0[0] == F(15, 32)

    def test_rows_for_csv(self):
        rep = skorohod_sequence([on_line([1], [1])], on_line([0], [1]))
        assert list(rep.rows()) == [(1, 1, 1)]
