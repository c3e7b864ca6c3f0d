import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from threshold_lab import (
    InvalidFunctionError,
    ProductMeasure,
    QaryFunction,
    SymmetryGroup,
    check_fair,
    check_monotone,
    check_symmetric,
    check_zero_monotone,
    dictator,
    graph_property,
    leq_a,
    plurality,
    prob_value,
)
from threshold_lab.families import vertex_action_generators

from oracles import brute_monotone


def reverify_monotone_witness(f, witness):
    a = witness["a"]
    assert leq_a(witness["x"], witness["y"], a)
    assert f(witness["x"]) == a and f(witness["y"]) != a


class TestLeqA:
    def test_reflexive_on_examples(self):
        assert leq_a((1, 2), (1, 2), 0)

    def test_single_change_to_anchor(self):
        assert leq_a((1, 2), (0, 2), 0)

    def test_change_to_non_anchor_fails(self):
        assert not leq_a((1, 2), (0, 1), 0)

    @settings(max_examples=200, deadline=None)
    @given(st.integers(2, 3), st.integers(1, 5), st.integers(0, 2**31), st.integers(0, 2))
    def test_partial_order_axioms(self, q, n, seed, a):
        a = a % q
        rng = np.random.default_rng(seed)
        x, y, z = (tuple(rng.integers(0, q, size=n)) for _ in range(3))
        # reflexivity
        assert leq_a(x, x, a)
        # antisymmetry
        if leq_a(x, y, a) and leq_a(y, x, a):
            assert x == y
        # transitivity
        if leq_a(x, y, a) and leq_a(y, z, a):
            assert leq_a(x, z, a)


class TestCheckMonotone:
    def test_dictator_passes(self):
        assert check_monotone(dictator(3, 3, 1).tabulate()).passed

    @pytest.mark.parametrize("tie_break", ["first_occurrence", "smallest_index"])
    @pytest.mark.parametrize("q,n", [(2, 3), (3, 3), (3, 4)])
    def test_plurality_passes(self, q, n, tie_break):
        assert check_monotone(plurality(q, n, tie_break).tabulate()).passed

    def test_anti_plurality_fails_with_witness(self):
        # least popular symbol wins, q=2 n=3: minority rule
        pts = itertools.product((0, 1), repeat=3)
        f = QaryFunction.from_table(2, 3, [1 if x.count(0) >= 2 else 0 for x in pts])
        result = check_monotone(f)
        assert not result.passed
        reverify_monotone_witness(f, result.witness)

    def test_cover_check_equals_brute_force(self, rng):
        for _ in range(40):
            q = int(rng.integers(2, 4))
            n = int(rng.integers(1, 4))
            f = QaryFunction.from_table(q, n, rng.integers(0, q, size=q**n))
            assert check_monotone(f).passed == brute_monotone(f)


class TestCheckZeroMonotone:
    def test_plurality_indicator_reduction(self):
        # relabeling a symbol to 0 turns value-a monotonicity into 0-monotonicity
        from threshold_lab import permute_input_symbols

        f = plurality(3, 3).tabulate()
        assert check_monotone(f).passed
        for a in range(3):
            swap = list(range(3))
            swap[0], swap[a] = swap[a], swap[0]
            relabeled = permute_input_symbols(f, swap)
            ind = relabeled.indicator(swap[0] if a == 0 else a)
            # f(swap(x)) = a iff relabeled hits a; anchor is now symbol 0
            ind_tab = QaryFunction.from_table(
                3, 3, (permute_input_symbols(f, swap).table == a).astype(float),
                codomain="real",
            )
            assert check_zero_monotone(ind_tab).passed

    def test_constant_passes(self):
        f = QaryFunction.from_table(2, 2, [0.0] * 4, codomain="real")
        assert check_zero_monotone(f).passed

    def test_anti_dictator_fails(self):
        # 1[x0 != 0]
        f = QaryFunction.from_table(2, 2, [0.0, 0.0, 1.0, 1.0], codomain="real")
        result = check_zero_monotone(f)
        assert not result.passed
        w = result.witness
        assert leq_a(w["x"], w["y"], 0)
        assert f(w["x"]) == 1.0 and f(w["y"]) == 0.0

    def test_rejects_non_binary(self):
        f = QaryFunction.from_table(2, 1, [0.0, 2.0], codomain="real")
        with pytest.raises(InvalidFunctionError):
            check_zero_monotone(f)


class TestCheckSymmetric:
    def test_count_based_plurality_is_anonymous(self):
        f = plurality(3, 4, "smallest_index").tabulate()
        result = check_symmetric(f, SymmetryGroup.full_symmetric(4))
        assert result.passed
        assert result.group_transitive

    def test_tie_free_plurality_is_anonymous(self):
        # q=2 with odd n never ties, so the tie break is irrelevant
        f = plurality(2, 3).tabulate()
        assert check_symmetric(f, SymmetryGroup.full_symmetric(3)).passed

    def test_first_occurrence_breaks_anonymity_at_ties(self):
        # the sequence-sensitive tie break trades anonymity for fairness
        f = plurality(2, 4).tabulate()
        result = check_symmetric(f, SymmetryGroup.full_symmetric(4))
        assert not result.passed

    def test_dictator_fails_under_cyclic_group(self):
        f = dictator(2, 3, 0).tabulate()
        result = check_symmetric(f, SymmetryGroup.cyclic(3))
        assert not result.passed
        w = result.witness
        sigma = w["permutation"]
        x = w["x"]
        permuted = [x[sigma[i]] for i in range(3)]
        assert f(permuted) != f(x)

    def test_witness_on_rotated_bits(self):
        # x = (0,1,1) changes value under rotation for the first-bit dictator
        f = dictator(2, 3, 0).tabulate()
        sigma = [1, 2, 0]
        x = (0, 1, 1)
        assert f([x[s] for s in sigma]) != f(x)

    def test_graph_property_under_vertex_action(self):
        f = graph_property(4, 2, "most_popular_color").tabulate()
        group = SymmetryGroup(f.n, tuple(vertex_action_generators(4)))
        result = check_symmetric(f, group)
        assert result.passed
        assert result.group_transitive

    def test_transitivity_checker(self):
        assert SymmetryGroup.cyclic(5).is_transitive()
        assert SymmetryGroup.full_symmetric(4).is_transitive()
        # the identity alone is not transitive for n >= 2
        assert not SymmetryGroup(3, (list(range(3)),)).is_transitive()


class TestCheckFair:
    def test_dictator_passes(self):
        assert check_fair(dictator(3, 2, 1).tabulate()).passed

    def test_smallest_index_plurality_fails_at_tie(self):
        f = plurality(2, 2, "smallest_index").tabulate()
        result = check_fair(f)
        assert not result.passed
        w = result.witness
        assert w["x"] == [0, 1]
        pi = w["symbol_permutation"]
        x = w["x"]
        assert f([pi[v] for v in x]) != pi[f(x)]

    @pytest.mark.parametrize("q,n", [(2, 2), (2, 4), (3, 3), (3, 4)])
    def test_first_occurrence_plurality_passes(self, q, n):
        assert check_fair(plurality(q, n).tabulate()).passed

    def test_fair_functions_have_uniform_outcome_probabilities(self):
        mu = ProductMeasure.uniform(3)
        f = plurality(3, 4).tabulate()
        assert check_fair(f).passed
        for a in range(3):
            assert prob_value(f, mu, a) == pytest.approx(1 / 3, abs=1e-10)
