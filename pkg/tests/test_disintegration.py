from fractions import Fraction as F

import numpy as np
import pytest

from parakant import (DiscreteMeasure, FiniteMetricSpace, GluingError, MeasureError, OffImageError,
                      PartitionScheme, ProductSpace, conditional_sequence, disintegrate, glue, project,
                      solve_exact, stabilization_level)
from parakant.checks import random_cost, random_measure

from conftest import measure

LINE4 = FiniteMetricSpace.line([0, 1, 2, 3])
PAIR = FiniteMetricSpace.line([0, 1])


def example():
    return DiscreteMeasure(LINE4, [F(1, 8), F(3, 8), F(1, 4), F(1, 4)]), [0, 0, 1, 1]


class TestDisintegrate:
    def test_derived_example(self):
        mu, f = example()
        d = disintegrate(mu, f, PAIR)
        assert list(d.base.weights) == [F(1, 2), F(1, 2)]
        assert list(d.conditional(0).weights) == [F(1, 4), F(3, 4), 0, 0]
        assert list(d.conditional(1).weights) == [0, 0, F(1, 2), F(1, 2)]
        assert d.reconstruct() == mu
        assert d.is_proper()

    def test_off_image(self):
        mu = measure([1, 0])
        d = disintegrate(mu, [0, 1])
        with pytest.raises(OffImageError):
            d.conditional(1)

    def test_identity_map_gives_diracs(self):
        mu = measure([F(1, 3), F(2, 3)])
        d = disintegrate(mu, [0, 1])
        assert [list(d.conditional(y).weights) for y in (0, 1)] == [[1, 0], [0, 1]]

    def test_constant_map_returns_measure(self):
        mu = measure([F(1, 5), F(4, 5)])
        d = disintegrate(mu, lambda x: 0)
        assert d.conditional(0) == mu

    def test_map_leaving_target(self):
        with pytest.raises(MeasureError):
            disintegrate(measure([1]), [3], PAIR)

    def test_undefined_on_zero_mass_is_fine(self):
        d = disintegrate(measure([1, 0]), [0, None])
        assert d.reconstruct() == measure([1, 0])

    def test_random_reconstruction(self, rng):
        for _ in range(40):
            m, n = (int(x) for x in rng.integers(1, 5, 2))
            joint = random_measure(rng, ProductSpace(FiniteMetricSpace.discrete(m),
                                                     FiniteMetricSpace.discrete(n)), "rational")
            for axis in (0, 1):
                d = disintegrate(joint, joint.space.projection(axis))
                assert d.reconstruct() == joint and d.is_proper()
                assert list(d.base.weights) == list(project(joint, (axis,)).weights)

    def test_plan_round_trip_bit_exact(self, rng):
        mu = random_measure(rng, FiniteMetricSpace.discrete(4), "rational")
        nu = random_measure(rng, FiniteMetricSpace.discrete(3), "rational")
        sigma = solve_exact(random_cost(rng, 4, 3, "rational"), mu, nu).plan.as_measure()
        back = disintegrate(sigma, sigma.space.projection(0)).reconstruct()
        assert back.weights.tolist() == sigma.weights.tolist()


class TestPartitionScheme:
    def test_cells_nest(self):
        scheme = PartitionScheme([F(k, 7) for k in range(7)])
        for n in range(6):
            for y in range(7):
                coarse, fine = scheme.cell(y, n), scheme.cell(y, n + 1)
                assert tuple(c // 2 for c in fine) == coarse

    def test_index_embedding_levels(self):
        scheme = PartitionScheme.for_space(FiniteMetricSpace.discrete(3))
        # embedded at 0, 1/3, 2/3
        assert [scheme.cell(y, 1) for y in range(3)] == [(0,), (0,), (1,)]
        assert scheme.separation_level(range(3)) == 2

    def test_coordinate_embedding_in_half_cube(self):
        scheme = PartitionScheme.for_space(FiniteMetricSpace(points=[[0, 5], [4, 5], [2, 9]]))
        assert all(0 <= c <= F(1, 2) for c in scheme.embedding.flat)

    def test_rejects_outside_unit_cube(self):
        with pytest.raises(MeasureError):
            PartitionScheme([0, 1])

    def test_inseparable(self):
        with pytest.raises(MeasureError):
            PartitionScheme([F(1, 4), F(1, 4)]).separation_level([0, 1], max_level=20)


class TestConditionalSequence:
    def test_derived_levels(self):
        mu, f = example()
        scheme = PartitionScheme.for_space(PAIR)
        level0 = conditional_sequence(mu, f, scheme, 0, PAIR)
        # one cell: every conditional is mu itself
        assert all(list(w) == list(mu.weights) for w in level0.values())
        level1 = conditional_sequence(mu, f, scheme, 1, PAIR)
        assert list(level1[0]) == [F(1, 4), F(3, 4), 0, 0]
        assert stabilization_level(mu, f, scheme, PAIR) == 1

    def test_zero_mass_cell(self):
        scheme = PartitionScheme.for_space(PAIR)
        seq = conditional_sequence(measure([1, 0]), [0, 1], scheme, 1, PAIR)
        assert list(seq[1]) == [0, 0]

    def test_stabilizes_to_disintegration(self, rng):
        for _ in range(30):
            n = int(rng.integers(1, 6))
            Y = FiniteMetricSpace.line(sorted({F(int(v), 4) for v in rng.integers(0, 40, n)}))
            X = FiniteMetricSpace.discrete(3)
            joint = random_measure(rng, ProductSpace(X, Y), "rational")
            f = joint.space.projection(1)
            scheme = PartitionScheme.for_space(Y)
            d = disintegrate(joint, f, Y)
            start = stabilization_level(joint, f, scheme, Y)
            for lv in range(start, start + 3):
                seq = conditional_sequence(joint, f, scheme, lv, Y)
                for y, cond in d.conditionals.items():
                    assert list(seq[y]) == list(cond.weights)

    def test_scheme_size_mismatch(self):
        mu, f = example()
        with pytest.raises(MeasureError):
            conditional_sequence(mu, f, PartitionScheme([0]), 1, PAIR)


class TestGlue:
    def test_derived_example(self):
        X = FiniteMetricSpace.discrete(2)
        mu12 = DiscreteMeasure(ProductSpace(X, X), [F(1, 4), F(1, 4), 0, F(1, 2)])
        mu23 = DiscreteMeasure(ProductSpace(X, X), [F(1, 8), F(1, 8), F(3, 8), F(3, 8)])
        eta = glue(mu12, mu23).matrix()
        assert eta[0, 0, 0] == F(1, 8) and eta[0, 1, 0] == F(1, 8) and eta[1, 1, 1] == F(1, 4)
        assert eta[1, 0, 0] == 0

    def test_faces_exact(self, rng):
        for _ in range(30):
            dims = [int(v) for v in rng.integers(1, 4, 3)]
            spaces = [FiniteMetricSpace.discrete(k) for k in dims]
            triple = random_measure(rng, ProductSpace(*spaces), "rational")
            mu12, mu23 = project(triple, (0, 1)), project(triple, (1, 2))
            eta = glue(mu12, mu23)
            assert project(eta, (0, 1)) == mu12 and project(eta, (1, 2)) == mu23

    def test_conditionally_independent(self):
        # glued measure makes X1 and X3 independent given X2
        X = FiniteMetricSpace.discrete(2)
        a = DiscreteMeasure(ProductSpace(X, X), [F(1, 2), 0, 0, F(1, 2)])
        eta = glue(a, a).matrix()
        assert eta[0, 0, 0] == F(1, 2) and eta[1, 1, 1] == F(1, 2)

    def test_mismatch_reports_discrepancy(self):
        X = FiniteMetricSpace.discrete(2)
        a = DiscreteMeasure(ProductSpace(X, X), [F(1, 2), 0, 0, F(1, 2)])
        b = DiscreteMeasure(ProductSpace(X, X), [1, 0, 0, 0])
        with pytest.raises(GluingError) as err:
            glue(a, b)
        assert err.value.discrepancy == 1

    def test_middle_space_mismatch(self):
        X, Z = FiniteMetricSpace.discrete(2), FiniteMetricSpace.discrete(3)
        a = DiscreteMeasure(ProductSpace(X, X), [F(1, 4)] * 4)
        b = DiscreteMeasure(ProductSpace(Z, X), [F(1, 6)] * 6)
        with pytest.raises(MeasureError):
            glue(a, b)

    def test_float_tolerance(self):
        X = FiniteMetricSpace.discrete(2)
        a = DiscreteMeasure(ProductSpace(X, X), np.array([0.25, 0.25, 0.25, 0.25]))
        b = DiscreteMeasure(ProductSpace(X, X), np.array([0.5, 0.0, 0.0, 0.5]))
        eta = glue(a, b)
        np.testing.assert_allclose(project(eta, (1, 2)).weights, b.weights, atol=1e-12)
