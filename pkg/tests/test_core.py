import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from threshold_lab import (
    DegenerateMeasureError,
    DimensionMismatchError,
    InvalidFunctionError,
    MeasurePath,
    ProductMeasure,
    QaryFunction,
    SimplexSampler,
    TableSizeError,
    conditional_expectation,
    expectation,
    permute_input_symbols,
    prob_value,
    sample_simplex,
)
from threshold_lab.core import all_points, index_of, product_weights

from oracles import enum_expectation, enum_prob, random_positive_measure, random_real_function


class TestProductMeasure:
    def test_atoms_validated(self):
        with pytest.raises(DegenerateMeasureError):
            ProductMeasure(2, [0.5, 0.6])
        with pytest.raises(DegenerateMeasureError):
            ProductMeasure(2, [-0.1, 1.1])
        with pytest.raises(DimensionMismatchError):
            ProductMeasure(3, [0.5, 0.5])

    def test_degenerate_flagged_but_accepted(self):
        mu = ProductMeasure(3, [0.0, 0.5, 0.5])
        assert mu.degenerate
        assert mu.min_atom() == 0.0
        with pytest.raises(DegenerateMeasureError):
            mu.require_positive()

    def test_condition_off(self):
        mu = ProductMeasure(3, [0.5, 0.2, 0.3])
        off = mu.condition_off(0)
        assert off.atoms[0] == 0.0
        assert np.allclose(off.atoms, [0.0, 0.4, 0.6])


class TestTableIndexing:
    def test_index_order_first_coordinate_most_significant(self):
        # index(x) = sum x_j q^(n-1-j)
        assert index_of((1, 0), 2) == 2
        assert index_of((0, 1), 2) == 1
        assert index_of((2, 1, 0), 3) == 2 * 9 + 1 * 3

    def test_all_points_round_trip(self):
        pts = all_points(3, 2)
        assert [index_of(p, 3) for p in pts] == list(range(9))

    def test_table_length_enforced(self):
        with pytest.raises(InvalidFunctionError):
            QaryFunction.from_table(2, 2, [0, 1, 0])

    def test_size_cap(self):
        with pytest.raises(TableSizeError):
            all_points(2, 25)


class TestExpectation:
    def test_constant(self):
        f = QaryFunction.from_table(2, 2, [3.0] * 4, codomain="real")
        for atoms in ([0.5, 0.5], [0.2, 0.8]):
            assert expectation(f, ProductMeasure(2, atoms)) == pytest.approx(3.0)

    def test_dictator_expectation_is_second_atom(self):
        f = QaryFunction.from_table(2, 1, [0.0, 1.0], codomain="real")
        assert expectation(f, ProductMeasure(2, [0.3, 0.7])) == pytest.approx(0.7)

    def test_majority_indicator_value(self, majority3):
        ind = majority3.indicator(0)
        mu = ProductMeasure(2, [0.6, 0.4])
        # enumerate all 8 outcomes: 0.6^3 + 3 * 0.6^2 * 0.4
        assert expectation(ind, mu) == pytest.approx(0.648, abs=1e-12)
        assert enum_expectation(ind, mu) == pytest.approx(0.648, abs=1e-12)

    def test_matches_enumeration_on_random_instances(self, rng):
        for _ in range(20):
            q = int(rng.integers(2, 4))
            n = int(rng.integers(1, 4))
            f = random_real_function(q, n, rng)
            mu = random_positive_measure(q, rng)
            assert expectation(f, mu) == pytest.approx(enum_expectation(f, mu), abs=1e-10)

    @settings(max_examples=30, deadline=None)
    @given(st.floats(-5, 5), st.floats(-5, 5), st.integers(0, 2**31))
    def test_linearity(self, alpha, beta, seed):
        rng = np.random.default_rng(seed)
        t1, t2 = rng.standard_normal(8), rng.standard_normal(8)
        mu = random_positive_measure(2, rng)
        f = QaryFunction.from_table(2, 3, t1, codomain="real")
        g = QaryFunction.from_table(2, 3, t2, codomain="real")
        combo = QaryFunction.from_table(2, 3, alpha * t1 + beta * t2, codomain="real")
        assert expectation(combo, mu) == pytest.approx(
            alpha * expectation(f, mu) + beta * expectation(g, mu), abs=1e-10
        )


class TestProbValue:
    def test_constant_function(self):
        f = QaryFunction.from_table(3, 2, [1] * 9)
        assert prob_value(f, ProductMeasure.uniform(3), 1) == pytest.approx(1.0)

    def test_dictator(self):
        f = QaryFunction.from_table(2, 1, [0, 1])
        assert prob_value(f, ProductMeasure(2, [0.3, 0.7]), 0) == pytest.approx(0.3)

    def test_plurality_uniform_is_fair_split(self):
        from threshold_lab import plurality

        f = plurality(3, 3).tabulate()
        mu = ProductMeasure.uniform(3)
        for a in range(3):
            assert prob_value(f, mu, a) == pytest.approx(1 / 3, abs=1e-10)
            assert enum_prob(f, mu, a) == pytest.approx(1 / 3, abs=1e-10)

    def test_probabilities_sum_to_one(self, rng):
        for _ in range(20):
            q = int(rng.integers(2, 4))
            n = int(rng.integers(1, 4))
            f = QaryFunction.from_table(q, n, rng.integers(0, q, size=q**n))
            mu = random_positive_measure(q, rng)
            total = sum(prob_value(f, mu, a) for a in range(q))
            assert total == pytest.approx(1.0, abs=1e-10)

    def test_symbol_out_of_range(self):
        f = QaryFunction.from_table(2, 1, [0, 1])
        with pytest.raises(DimensionMismatchError):
            prob_value(f, ProductMeasure.uniform(2), 5)

    def test_measure_mismatch(self):
        f = QaryFunction.from_table(2, 1, [0, 1])
        with pytest.raises(DimensionMismatchError):
            prob_value(f, ProductMeasure.uniform(3), 0)


class TestConditionalExpectation:
    def test_full_set_is_identity(self, xor_indicator):
        mu = ProductMeasure.uniform(2)
        g = conditional_expectation(xor_indicator, mu, [0, 1])
        assert np.allclose(g.table, xor_indicator.table)

    def test_empty_set_is_constant_mean(self, xor_indicator):
        mu = ProductMeasure(2, [0.3, 0.7])
        g = conditional_expectation(xor_indicator, mu, [])
        assert np.allclose(g.table, expectation(xor_indicator, mu))

    def test_xor_on_one_coordinate_is_half(self, xor_indicator):
        g = conditional_expectation(xor_indicator, ProductMeasure.uniform(2), [0])
        assert np.allclose(g.table, 0.5)

    def test_projection_idempotent(self, rng):
        for _ in range(10):
            q, n = 3, 3
            f = random_real_function(q, n, rng)
            mu = random_positive_measure(q, rng)
            coords = [0, 2]
            once = conditional_expectation(f, mu, coords)
            twice = conditional_expectation(once, mu, coords)
            assert np.allclose(once.table, twice.table, atol=1e-12)

    def test_tower_property(self, rng):
        for _ in range(10):
            q = int(rng.integers(2, 4))
            n = int(rng.integers(1, 5))
            f = random_real_function(q, n, rng)
            mu = random_positive_measure(q, rng)
            coords = [i for i in range(n) if rng.random() < 0.5]
            g = conditional_expectation(f, mu, coords)
            assert expectation(g, mu) == pytest.approx(expectation(f, mu), abs=1e-10)

    def test_bad_subset(self, xor_indicator):
        with pytest.raises(DimensionMismatchError):
            conditional_expectation(xor_indicator, ProductMeasure.uniform(2), [5])


class TestSimplexSampler:
    def test_dimension_one_is_point(self):
        mu = sample_simplex(SimplexSampler(1, seed=3))
        assert mu.atoms.tolist() == [1.0]

    def test_uniform_mean_on_two_atoms(self):
        sampler = SimplexSampler(2, seed=99)
        vals = [sampler.sample().atoms[0] for _ in range(100_000)]
        assert np.mean(vals) == pytest.approx(0.5, abs=0.01)

    def test_seed_determinism(self):
        a = SimplexSampler(3, seed=12)
        b = SimplexSampler(3, seed=12)
        for _ in range(5):
            assert np.array_equal(a.sample().atoms, b.sample().atoms)

    def test_split_streams_differ_and_are_deterministic(self):
        children = SimplexSampler(2, seed=5).split(2)
        again = SimplexSampler(2, seed=5).split(2)
        s0, s1 = children[0].sample(), children[1].sample()
        assert not np.array_equal(s0.atoms, s1.atoms)
        assert np.array_equal(s0.atoms, again[0].sample().atoms)


class TestMeasurePath:
    def test_requires_zero_anchor_mass(self):
        with pytest.raises(DegenerateMeasureError):
            MeasurePath(anchor=0, base=ProductMeasure(2, [0.5, 0.5]))

    def test_endpoints_and_affinity(self):
        base = ProductMeasure(3, [0.0, 0.4, 0.6])
        path = MeasurePath(anchor=0, base=base)
        assert np.allclose(path.measure_at(0.0).atoms, base.atoms)
        assert np.allclose(path.measure_at(1.0).atoms, [1.0, 0.0, 0.0])
        mid = path.measure_at(0.5).atoms
        assert np.allclose(mid, 0.5 * base.atoms + 0.5 * np.array([1.0, 0.0, 0.0]))

    def test_direction_sums_to_zero(self):
        path = MeasurePath(anchor=1, base=ProductMeasure(3, [0.3, 0.0, 0.7]))
        assert path.direction().sum() == pytest.approx(0.0, abs=1e-15)

    def test_from_measure_round_trip(self):
        mu = ProductMeasure(3, [0.2, 0.5, 0.3])
        path, t = MeasurePath.from_measure(mu, anchor=1)
        assert t == pytest.approx(0.5)
        assert np.allclose(path.measure_at(t).atoms, mu.atoms)


class TestPermuteInputSymbols:
    def test_swap_on_dictator(self):
        f = QaryFunction.from_table(3, 1, [0, 1, 2])
        g = permute_input_symbols(f, [2, 1, 0])
        assert g.table.tolist() == [2, 1, 0]

    def test_round_trip(self, rng):
        f = QaryFunction.from_table(3, 2, rng.integers(0, 3, size=9))
        perm = [1, 2, 0]
        inv = np.argsort(perm)
        g = permute_input_symbols(permute_input_symbols(f, perm), inv.tolist())
        assert np.array_equal(g.table, f.table)


def test_product_weights_match_point_probabilities(rng):
    mu = random_positive_measure(3, rng)
    w = product_weights(mu, 2)
    for idx, pt in enumerate(itertools.product(range(3), repeat=2)):
        assert w[idx] == pytest.approx(mu.atoms[pt[0]] * mu.atoms[pt[1]])


def test_oracle_batch_and_scalar_agree(rng):
    from threshold_lab import plurality

    f = plurality(3, 4)
    pts = all_points(3, 4)
    batch = f.batch(pts)
    scalars = [f(p) for p in pts]
    assert batch.tolist() == scalars
    tab = f.tabulate()
    assert np.array_equal(tab.table, batch)
