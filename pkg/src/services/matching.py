# =====================================================
# src/services/matching.py - Cosine similarity and maximum-weight bipartite matching
# =====================================================
import logging
from typing import List, Sequence

import numpy as np
from scipy.optimize import linear_sum_assignment

from src.schemas.evaluation import EmbeddingSet, MatchingArc, MatchingResult, SimilarityMatrix
from .exceptions import DimensionMismatch, ZeroVector

logger = logging.getLogger(__name__)

TIE_TOLERANCE = 1e-9


def similarity_matrix(x: EmbeddingSet, y: EmbeddingSet) -> SimilarityMatrix:
    """entry(i, j) = cos(x_i, y_j); righe generate, colonne di riferimento"""
    if len(x) == 0 or len(y) == 0:
        return SimilarityMatrix(n_rows=len(x), n_cols=len(y), values=[[] for _ in range(len(x))])
    if x.dimension != y.dimension:
        raise DimensionMismatch(f"Generated vectors have dimension {x.dimension}, reference {y.dimension}")

    xa, ya = x.as_array(), y.as_array()
    x_norms = np.linalg.norm(xa, axis=1)
    y_norms = np.linalg.norm(ya, axis=1)
    if np.any(x_norms == 0) or np.any(y_norms == 0):
        raise ZeroVector("Cosine similarity is undefined for all-zero embeddings")

    cosines = (xa @ ya.T) / np.outer(x_norms, y_norms)
    return SimilarityMatrix.from_array(np.clip(cosines, -1.0, 1.0))


def _optimum(weights: np.ndarray, rows: Sequence[int], cols: Sequence[int]) -> float:
    if not rows or not cols:
        return 0.0
    sub = weights[np.ix_(list(rows), list(cols))]
    r, c = linear_sum_assignment(sub, maximize=True)
    return float(sub[r, c].sum())


def max_weight_matching(matrix: SimilarityMatrix) -> MatchingResult:
    """
    Assegnamento iniettivo di dimensione min(|X|, |Y|) a peso totale massimo.

    Tra gli ottimi equivalenti viene scelto l'insieme di archi
    lessicograficamente minore: le righe sono fissate in ordine, ognuna
    sulla prima colonna che mantiene il peso ottimo.
    """
    weights = matrix.as_array()
    n, m = matrix.n_rows, matrix.n_cols
    if n == 0 or m == 0:
        return MatchingResult(arcs=[], unmatched_generated=list(range(n)), unmatched_reference=list(range(m)))
    if not np.all(np.isfinite(weights)):
        raise ValueError("similarity matrix contains non-finite entries")

    best = _optimum(weights, range(n), range(m))
    tolerance = TIE_TOLERANCE * max(1.0, abs(best))
    target = min(n, m)

    arcs: List[MatchingArc] = []
    fixed_weight = 0.0
    free_cols = list(range(m))
    for i in range(n):
        rest_rows = list(range(i + 1, n))
        for j in free_cols:
            cols_left = [c for c in free_cols if c != j]
            if len(arcs) + 1 + min(len(rest_rows), len(cols_left)) != target:
                continue
            total = fixed_weight + weights[i, j] + _optimum(weights, rest_rows, cols_left)
            if total >= best - tolerance:
                arcs.append(MatchingArc(generated=i, reference=j, similarity=float(weights[i, j])))
                fixed_weight += float(weights[i, j])
                free_cols = cols_left
                break
        # nessuna colonna compatibile: la riga resta senza coppia (solo se n > m)

    matched_rows = {a.generated for a in arcs}
    return MatchingResult(
        arcs=arcs,
        unmatched_generated=[i for i in range(n) if i not in matched_rows],
        unmatched_reference=free_cols,
    )
