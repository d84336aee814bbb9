import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from twistlab.mcg_floer import (
    ChainConfig,
    HomClass,
    MappingClass2,
    chain_stretch_factor,
    classify,
    composite_matrix,
    generator_product,
    growth_rate,
    hf_rank_sequence,
    hf_rank_square_twist,
    intersection_number_torus,
)

CAT_LAMBDA = (3 + math.sqrt(5)) / 2
LAMBDA_33 = (7 + math.sqrt(45)) / 2


class TestCompositeMatrix:
    def test_identity(self):
        assert composite_matrix(0, 0).entries == ((1, 0), (0, 1))

    def test_three_three(self):
        # raw product [[-8, 3], [-3, 1]], stored with normalized sign
        assert composite_matrix(3, 3).entries == ((8, -3), (3, -1))

    def test_cat_map_product(self):
        m = generator_product([(1, 1), (2, -1)])
        # [[1,1],[0,1]] * [[1,0],[1,1]] = [[2,1],[1,1]]
        assert m.entries == ((2, 1), (1, 1))

    def test_general_product_matches_formula(self):
        for k in range(-4, 5):
            for l in range(-4, 5):
                assert composite_matrix(k, l).entries == MappingClass2(
                    ((1 - k * l, l), (-k, 1))
                ).entries

    def test_sign_normalization_idempotent(self):
        m = MappingClass2(((-2, -1), (-1, -1)))
        assert m.entries == ((2, 1), (1, 1))
        assert MappingClass2(m.entries).entries == m.entries

    def test_rejects_non_unimodular(self):
        with pytest.raises(ValueError):
            MappingClass2(((2, 0), (0, 1)))


class TestClassify:
    def test_cat_map(self):
        out = classify(MappingClass2(((2, 1), (1, 1))))
        assert out["type"] == "Anosov"
        assert out["stretch_factor"] == pytest.approx(CAT_LAMBDA, abs=1e-12)

    def test_reducible_at_kl_four(self):
        for k, l in ((2, 2), (1, 4), (4, 1), (-2, -2)):
            assert k * l == 4
            assert classify(composite_matrix(k, l))["type"] == "Reducible"

    def test_periodic(self):
        assert classify(composite_matrix(1, 1))["type"] == "Periodic"

    def test_trichotomy_sweep(self):
        for k in range(-6, 7):
            for l in range(-6, 7):
                out = classify(composite_matrix(k, l))
                if k * l in (0, 1, 2, 3, 4):
                    assert out["type"] in ("Periodic", "Reducible")
                else:
                    assert out["type"] == "Anosov"

    @settings(max_examples=60, deadline=None)
    @given(
        k=st.integers(-6, 6),
        l=st.integers(-6, 6),
        a=st.integers(-3, 3),
        b=st.integers(-3, 3),
        c=st.integers(-3, 3),
    )
    def test_conjugation_invariance(self, k, l, a, b, c):
        # build a determinant-1 conjugator from generators
        g = generator_product([(1, a), (2, b), (1, c)])
        m = composite_matrix(k, l)
        conj = g @ m @ g.power(-1)
        assert abs(conj.trace) == abs(m.trace)
        assert classify(conj)["type"] == classify(m)["type"]


class TestIntersectionNumber:
    def test_basic(self):
        assert intersection_number_torus(HomClass(1, 0), HomClass(0, 1)) == 1
        assert intersection_number_torus(HomClass(1, 0), HomClass(1, 0)) == 0
        assert intersection_number_torus(
            HomClass(2, 3, curve=False), HomClass(4, 5, curve=False)
        ) == 2

    def test_symmetry_and_scaling(self):
        c1, c2 = HomClass(3, 5), HomClass(2, 7)
        assert intersection_number_torus(c1, c2) == intersection_number_torus(c2, c1)
        scaled = HomClass(3 * c2.a, 3 * c2.b, curve=False)
        assert intersection_number_torus(c1, scaled) == 3 * intersection_number_torus(c1, c2)

    def test_rejects_imprimitive_curve(self):
        with pytest.raises(ValueError):
            HomClass(2, 4)


class TestRankSequence:
    def test_three_three_ranks(self):
        seq = hf_rank_sequence(3, 3, 3)
        assert seq.values == [1, 8, 55]

    def test_ratio_approaches_lambda(self):
        seq = hf_rank_sequence(3, 3, 3)
        assert seq.values[2] / seq.values[1] == pytest.approx(LAMBDA_33, rel=0.02)

    def test_exactness_against_repeated_multiplication(self):
        m = composite_matrix(3, 3)
        acc = MappingClass2(((1, 0), (0, 1)))
        seq = hf_rank_sequence(3, 3, 60)
        for n in range(60):
            acc = acc @ m
            vec = acc.apply((0, 1))
            assert seq.values[n] in (abs(vec[1]), None)

    def test_subexponential_for_small_kl(self):
        for k, l in ((0, 0), (1, 1), (1, 2), (1, 3), (2, 2), (1, 4)):
            seq = hf_rank_sequence(k, l, 80)
            logs = [
                math.log(v) / (n + 1)
                for n, v in enumerate(seq.values)
                if v is not None and n + 1 > 10
            ]
            if logs:
                assert max(logs[-5:]) < 0.1

    def test_undefined_entries_flagged(self):
        seq = hf_rank_sequence(1, 1, 12)
        assert None in seq.values
        assert 0 not in seq.values


class TestSquareTwist:
    def test_values(self):
        assert hf_rank_square_twist(0) == 0
        assert hf_rank_square_twist(3) == 6
        for k in range(101):
            assert hf_rank_square_twist(k) == 2 * k

    def test_zero_growth(self):
        assert math.log(hf_rank_square_twist(1000)) / 1000 < 0.01


class TestGrowthRate:
    def test_three_three(self):
        seq = hf_rank_sequence(3, 3, 40)
        assert growth_rate(seq) == pytest.approx(math.log(LAMBDA_33), abs=1e-3)

    def test_cat_map_driven(self):
        # T2^1 T1^-1 has trace 3, the cat-map stretch factor
        seq = hf_rank_sequence(1, -1, 40)
        assert growth_rate(seq) == pytest.approx(math.log(CAT_LAMBDA), abs=1e-3)

    def test_constant_sequence_rejected_or_zero(self):
        from twistlab.mcg_floer import RankSequence

        assert growth_rate(RankSequence([5] * 10)) == pytest.approx(0.0, abs=1e-12)

    def test_needs_five_entries(self):
        from twistlab.mcg_floer import RankSequence

        with pytest.raises(ValueError):
            growth_rate(RankSequence([1, 2, 3]))

    def test_anosov_sweep_matches_classify(self):
        for k in range(1, 7):
            for l in range(1, 7):
                if not 5 <= k * l <= 20:
                    continue
                lam = classify(composite_matrix(k, l))["stretch_factor"]
                seq = hf_rank_sequence(k, l, 40)
                assert growth_rate(seq) == pytest.approx(math.log(lam), abs=1e-3)


class TestChainStretchFactor:
    def test_m2_matches_exact_torus(self):
        for k in (1, 3, -1, -3):
            cfg = ChainConfig(2, (k, -k))
            out = chain_stretch_factor(cfg)
            # chain (k, -k) is T1^k o T2^{-k}, i.e. composite_matrix(-k, k)
            exact = classify(composite_matrix(-k, k))["stretch_factor"]
            assert out["stretch_factor"] == pytest.approx(exact, abs=1e-12)

    def test_m3_alternating_certified(self):
        out = chain_stretch_factor(ChainConfig(3, (1, -1, 1)))
        assert out["pseudo_anosov_certified"]
        assert abs(out["trace"]) > 2
        assert out["mu"] == pytest.approx(2.0, abs=1e-10)
        assert out["stretch_factor"] == pytest.approx(3 + 2 * math.sqrt(2), abs=1e-9)

    def test_non_alternating_rejected(self):
        with pytest.raises(ValueError):
            chain_stretch_factor(ChainConfig(3, (1, 1, -1)))
        with pytest.raises(ValueError):
            chain_stretch_factor(ChainConfig(2, (1, 0)))
