# =====================================================
# test/services/test_matching.py
# =====================================================
"""
Test per similarity matrix e matching a peso massimo.

Il matching viene confrontato con una ricerca esaustiva su matrici
casuali piccole (seed fissi).
"""

from itertools import combinations, permutations

import numpy as np
import pytest

from src.schemas.evaluation import EmbeddingItem, EmbeddingSet, EvalSide, SimilarityMatrix
from src.services.exceptions import DimensionMismatch, ZeroVector
from src.services.matching import max_weight_matching, similarity_matrix


def _set(vectors, side=EvalSide.GENERATED) -> EmbeddingSet:
    return EmbeddingSet(side=side, items=[
        EmbeddingItem(original=str(i), preprocessed=str(i), vector=tuple(v)) for i, v in enumerate(vectors)
    ])


def brute_force(weights: np.ndarray):
    """Tutti gli assegnamenti iniettivi di dimensione min(n, m): (peso, coppie ordinate)"""
    n, m = weights.shape
    k = min(n, m)
    results = []
    for rows in combinations(range(n), k):
        for cols in permutations(range(m), k):
            pairs = tuple(zip(rows, cols))
            results.append((float(sum(weights[i, j] for i, j in pairs)), pairs))
    return results


class TestSimilarityMatrix:

    def test_cosines(self):
        x = _set([(1.0, 0.0), (1.0, 1.0)])
        y = _set([(2.0, 0.0), (0.0, 3.0)], EvalSide.REFERENCE)

        values = similarity_matrix(x, y).as_array()

        assert values[0].tolist() == pytest.approx([1.0, 0.0])
        assert values[1].tolist() == pytest.approx([2 ** -0.5, 2 ** -0.5])

    def test_empty_side(self):
        matrix = similarity_matrix(_set([(1.0, 0.0)]), _set([], EvalSide.REFERENCE))

        assert (matrix.n_rows, matrix.n_cols) == (1, 0)

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionMismatch):
            similarity_matrix(_set([(1.0, 0.0)]), _set([(1.0, 0.0, 0.0)], EvalSide.REFERENCE))

    def test_zero_vector(self):
        with pytest.raises(ZeroVector):
            similarity_matrix(_set([(0.0, 0.0)]), _set([(1.0, 0.0)], EvalSide.REFERENCE))


class TestMaxWeightMatching:

    @pytest.mark.parametrize("seed", range(200))
    def test_matches_brute_force(self, seed):
        rng = np.random.default_rng(seed)
        n, m = int(rng.integers(1, 7)), int(rng.integers(1, 7))
        weights = rng.uniform(-1.0, 1.0, size=(n, m))

        result = max_weight_matching(SimilarityMatrix.from_array(weights))

        best_weight, best_pairs = max(brute_force(weights), key=lambda r: r[0])
        assert len(result.arcs) == min(n, m)
        assert result.total_weight == pytest.approx(best_weight, abs=1e-9)
        assert tuple(result.pairs()) == best_pairs
        assert sorted([a.generated for a in result.arcs] + result.unmatched_generated) == list(range(n))
        assert sorted([a.reference for a in result.arcs] + result.unmatched_reference) == list(range(m))

    @pytest.mark.parametrize("seed", range(50))
    def test_permutation_equivariant(self, seed):
        rng = np.random.default_rng(seed)
        n, m = int(rng.integers(1, 8)), int(rng.integers(1, 8))
        weights = rng.uniform(-1.0, 1.0, size=(n, m))
        rows, cols = rng.permutation(n), rng.permutation(m)

        original = max_weight_matching(SimilarityMatrix.from_array(weights))
        permuted = max_weight_matching(SimilarityMatrix.from_array(weights[rows][:, cols]))

        # riga i del permutato = riga rows[i] dell'originale
        mapped = {(int(rows[i]), int(cols[j])) for i, j in permuted.pairs()}
        assert permuted.total_weight == pytest.approx(original.total_weight, abs=1e-9)
        assert mapped == set(original.pairs())

    def test_more_generated_than_reference(self):
        weights = np.array([[0.9, 0.1], [0.2, 0.8], [0.5, 0.5]])

        result = max_weight_matching(SimilarityMatrix.from_array(weights))

        assert set(result.pairs()) == {(0, 0), (1, 1)}
        assert result.unmatched_generated == [2]
        assert result.unmatched_reference == []
        assert result.total_weight == pytest.approx(1.7)

    def test_injective(self):
        weights = np.array([[0.9, 0.8, 0.1], [0.95, 0.2, 0.3]])

        result = max_weight_matching(SimilarityMatrix.from_array(weights))

        columns = [a.reference for a in result.arcs]
        assert len(set(columns)) == len(columns)
        assert result.pairs() == [(0, 1), (1, 0)]
        assert result.unmatched_reference == [2]

    def test_ties_pick_lexicographically_smallest(self):
        result = max_weight_matching(SimilarityMatrix.from_array(np.ones((3, 3))))

        assert result.pairs() == [(0, 0), (1, 1), (2, 2)]

    def test_tie_with_more_rows(self):
        result = max_weight_matching(SimilarityMatrix.from_array(np.full((3, 2), 0.5)))

        assert result.pairs() == [(0, 0), (1, 1)]
        assert result.unmatched_generated == [2]

    def test_ties_match_brute_force_minimum(self):
        weights = np.array([[0.5, 0.5, 0.2], [0.5, 0.5, 0.2], [0.2, 0.2, 0.2]])

        result = max_weight_matching(SimilarityMatrix.from_array(weights))

        optimal = [pairs for w, pairs in brute_force(weights) if w >= 1.2 - 1e-9]
        assert tuple(result.pairs()) == min(optimal)

    def test_empty(self):
        result = max_weight_matching(SimilarityMatrix(n_rows=2, n_cols=0, values=[[], []]))

        assert result.arcs == []
        assert result.unmatched_generated == [0, 1]

    def test_non_finite_rejected(self):
        with pytest.raises(ValueError):
            max_weight_matching(SimilarityMatrix.from_array(np.array([[np.nan]])))
