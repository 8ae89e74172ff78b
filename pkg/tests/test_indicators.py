import math
import random

import pytest
from hypothesis import given, strategies as st

from groindex.fields import FIELDS, FieldId
from groindex.indicators import (CountPair, DomainError, aggregate, cq_index, field_indexes,
                                 geometric_mean, gro, h_index, indexes, p_index, quality,
                                 quantity, rro, specialization)

WORLD = CountPair(12669278, 213945356)
counts = st.integers(min_value=1, max_value=10**9)
pairs = st.builds(CountPair, counts, st.integers(min_value=0, max_value=10**10))


def brute_h(cites):
    return max(h for h in range(len(cites) + 1) if sum(c >= h for c in cites) >= h)


class TestGeometricMean:
    def test_perfect_squares(self):
        assert geometric_mean(4, 9) == 6

    @pytest.mark.parametrize("x", [0, 1, 2.5, 1e-300, 1e200, 12669278])
    def test_idempotent(self, x):
        assert geometric_mean(x, x) == x

    def test_world_quantity(self):
        assert geometric_mean(12669278, 213945356) == pytest.approx(52062781, rel=1e-4)

    def test_negative_rejected(self):
        with pytest.raises(DomainError):
            geometric_mean(-1, 4)

    @given(st.floats(0, 1e150), st.floats(0, 1e150))
    def test_symmetric(self, a, b):
        assert geometric_mean(a, b) == geometric_mean(b, a)


class TestGro:
    def test_world(self):
        assert gro(WORLD) == pytest.approx(29651, rel=1e-3)

    @pytest.mark.parametrize("n,c,expected", [
        (370480, 2267589, 2369),        # Mathematics
        (394274, 13354013, 8816),       # Molecular Biol. & Genetics
        (1489725, 28295481, 11105),     # Chemistry
        (16759, 355231, 1279),          # Multidisciplinary
    ])
    def test_table_rows(self, n, c, expected):
        assert gro(CountPair(n, c)) == pytest.approx(expected, rel=1e-3)

    def test_all_ones(self):
        assert gro(CountPair(1, 1)) == 1

    def test_uncited_corpus_is_zero(self):
        assert gro(CountPair(10, 0)) == 0

    def test_zero_docs_rejected(self):
        with pytest.raises(DomainError):
            gro(CountPair(0, 5))

    def test_negative_counts_rejected(self):
        with pytest.raises(DomainError):
            CountPair(-1, 3)

    @given(pairs)
    def test_fourth_power_identity(self, pair):
        g = gro(pair)
        # g^4 * N = C^3, compared in the log domain
        if pair.citations:
            assert 4 * math.log(g) + math.log(pair.n_docs) == pytest.approx(
                3 * math.log(pair.citations), rel=1e-12, abs=1e-12)

    @given(pairs)
    def test_geometric_mean_of_quantity_and_quality(self, pair):
        assert gro(pair) == pytest.approx(geometric_mean(quantity(pair), quality(pair)), rel=1e-12)

    @given(pairs, st.integers(min_value=1, max_value=1000))
    def test_homogeneity(self, pair, k):
        scaled = CountPair(k * pair.n_docs, k * pair.citations)
        assert gro(scaled) == pytest.approx(math.sqrt(k) * gro(pair), rel=1e-9)

    @given(counts, st.integers(0, 10**9))
    def test_monotone_in_citations(self, n, c):
        assert gro(CountPair(n, c + 1)) > gro(CountPair(n, c))

    @given(counts, st.integers(1, 10**9))
    def test_monotone_in_documents(self, n, c):
        assert gro(CountPair(n + 1, c)) < gro(CountPair(n, c))

    @given(pairs, st.integers(1, 1000))
    def test_quality_is_scale_free(self, pair, k):
        assert quality(CountPair(k * pair.n_docs, k * pair.citations)) == quality(pair)


class TestRro:
    def test_world(self):
        # 29650.9888 / sqrt(16.89), via an independent calculator
        assert rro(WORLD, 16.89) == pytest.approx(7214, rel=5e-3)

    @given(pairs)
    def test_unit_world_quality(self, pair):
        assert rro(pair, 1.0) == gro(pair)

    def test_quarter(self):
        assert rro(CountPair(1, 1), 4) == 0.5

    @pytest.mark.parametrize("q", [0, -1.5])
    def test_bad_world_quality(self, q):
        with pytest.raises(DomainError):
            rro(CountPair(1, 1), q)

    @given(st.lists(pairs, min_size=2, max_size=10), st.floats(0.1, 100))
    def test_ratio_constant_across_entities(self, ps, q):
        for p in ps:
            if gro(p) > 0:
                assert rro(p, q) / gro(p) == pytest.approx(q ** -0.5, rel=1e-12)


class TestFieldIndexes:
    def test_world_against_itself(self):
        m = CountPair(370480, 2267589)
        v = field_indexes(m, m, FieldId.MATHEMATICS)
        assert v.gro_r == pytest.approx(2369, rel=1e-3)
        assert v.relative_quality == 1.0

    def test_molecular_biology(self):
        m = CountPair(394274, 13354013)
        assert field_indexes(m, m, FieldId.MOLECULAR_BIOLOGY_GENETICS).gro_r == pytest.approx(8816, rel=1e-3)

    def test_hand_example(self):
        v = field_indexes(CountPair(100, 400), CountPair(1000, 2000), FieldId.PHYSICS)
        assert v.relative_quality == pytest.approx(2.0)
        assert v.rro_r == pytest.approx(20.0, rel=1e-12)
        assert v.gro_r == pytest.approx(math.sqrt(800), rel=1e-12)

    def test_absent_field(self):
        assert field_indexes(CountPair(0, 0), CountPair(10, 20), FieldId.PHYSICS) is None

    @pytest.mark.parametrize("w", [CountPair(0, 5), CountPair(5, 0)])
    def test_zero_world_rejected(self, w):
        with pytest.raises(DomainError):
            field_indexes(CountPair(1, 1), w, FieldId.PHYSICS)

    @given(pairs, pairs)
    def test_rro_r_is_gro_r_over_root_world_quality(self, pair, world):
        if world.citations == 0:
            return
        v = field_indexes(pair, world, FieldId.CHEMISTRY)
        q_rw = world.citations / world.n_docs
        assert v.rro_r == pytest.approx(v.gro_r / math.sqrt(q_rw), rel=1e-9, abs=1e-300)


class TestPAndCq:
    def test_trivial(self):
        assert p_index(CountPair(1, 1)) == 1
        assert cq_index(CountPair(1, 1)) == 1

    def test_world_p_index(self):
        # 50-digit mpmath evaluation of (C^2/N)^(1/3)
        assert p_index(WORLD) == pytest.approx(1534.4448619667662021, rel=1e-12)

    def test_hand(self):
        assert p_index(CountPair(8, 4)) == pytest.approx(2 ** (1 / 3), rel=1e-14)
        assert cq_index(CountPair(1, 4)) == pytest.approx(8, rel=1e-14)

    def test_world_cq(self):
        assert cq_index(WORLD) == pytest.approx(gro(WORLD) ** 2, rel=1e-12)
        assert cq_index(WORLD) == pytest.approx(29651 ** 2, rel=2e-3)

    @pytest.mark.parametrize("fn", [p_index, cq_index, quality])
    def test_zero_docs(self, fn):
        with pytest.raises(DomainError):
            fn(CountPair(0, 0))

    @given(pairs)
    def test_cq_is_gro_squared(self, pair):
        assert cq_index(pair) == pytest.approx(gro(pair) ** 2, rel=1e-12)

    @given(pairs)
    def test_all_indexes_consistent(self, pair):
        v = indexes(pair, 16.89)
        assert v.quantity_q ** 2 == pytest.approx(pair.n_docs * pair.citations, rel=1e-12)
        assert v.gro ** 2 == pytest.approx(v.quantity_q * v.quality_q, rel=1e-12)
        assert v.cq == pytest.approx(v.gro ** 2, rel=1e-12)


class TestHIndex:
    @pytest.mark.parametrize("cites,h", [
        ([], 0), ([0, 0, 0], 0), ([10, 8, 5, 4, 3], 4), ([1], 1), ([100], 1), ([3, 3, 3], 3),
    ])
    def test_examples(self, cites, h):
        assert h_index(cites) == h == brute_h(cites)

    def test_input_not_mutated(self):
        cites = [1, 5, 3]
        h_index(cites)
        assert cites == [1, 5, 3]

    def test_negative(self):
        with pytest.raises(DomainError):
            h_index([3, -1])

    def test_random_against_brute_force(self):
        rng = random.Random(7)
        for _ in range(1000):
            cites = [rng.randint(0, 100) for _ in range(rng.randint(0, 50))]
            assert h_index(cites) == brute_h(cites)

    @given(st.lists(st.integers(0, 100), max_size=50))
    def test_order_free(self, cites):
        assert h_index(cites) == h_index(list(reversed(cites))) == brute_h(cites)


class TestSpecialization:
    def test_single(self):
        assert specialization({FieldId.PHYSICS: 5}) == (1.0, 1.0)

    def test_uniform(self):
        sgr, top2 = specialization({f: 3.0 for f in FIELDS})
        assert sgr == pytest.approx(1 / 22, rel=1e-12)
        assert top2 == pytest.approx(2 / 22, rel=1e-12)

    def test_hand(self):
        fs = FIELDS[:5]
        sgr, top2 = specialization(dict(zip(fs, [60, 10, 10, 10, 10])))
        assert sgr == pytest.approx(0.6)
        assert top2 == pytest.approx(0.7)

    @pytest.mark.parametrize("m", [{}, {FieldId.PHYSICS: 0.0, FieldId.CHEMISTRY: 0.0}])
    def test_degenerate(self, m):
        with pytest.raises(DomainError):
            specialization(m)

    @given(st.lists(st.floats(0, 1e6), min_size=1, max_size=22))
    def test_bounds(self, values):
        if sum(values) <= 0:
            return
        sgr, top2 = specialization(dict(zip(FIELDS, values)))
        assert 0 <= sgr <= top2 <= 1 + 1e-12


class TestAggregate:
    def test_sum(self):
        assert aggregate([CountPair(1, 2), CountPair(3, 4)]) == CountPair(4, 6)

    def test_singleton(self):
        assert aggregate([CountPair(7, 9)]) == CountPair(7, 9)

    def test_empty(self):
        with pytest.raises(DomainError):
            aggregate([])

    def test_medlife_group_of_world_table(self, world):
        medlife = [FieldId.BIOLOGY_BIOCHEMISTRY, FieldId.MOLECULAR_BIOLOGY_GENETICS,
                   FieldId.CLINICAL_MEDICINE, FieldId.MICROBIOLOGY, FieldId.MULTIDISCIPLINARY,
                   FieldId.IMMUNOLOGY, FieldId.NEUROSCIENCE_BEHAVIOR, FieldId.PHARMACOLOGY_TOXICOLOGY]
        # column sums of the eight table rows, done by hand
        assert aggregate(world.by_field[f] for f in medlife) == CountPair(4611664, 95956329)

    @given(st.lists(pairs, min_size=1, max_size=8), st.randoms())
    def test_order_independent(self, ps, rnd):
        shuffled = list(ps)
        rnd.shuffle(shuffled)
        assert aggregate(ps) == aggregate(shuffled)
        if len(ps) > 2:
            assert aggregate([aggregate(ps[:2])] + ps[2:]) == aggregate(ps)
