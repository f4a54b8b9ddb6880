"""Closed-form orthogonal baseline: ``W = argmin ||W X_D^T - Y_D^T||_F`` over
orthogonal ``W``, read off the SVD of the seed cross-covariance."""

import logging
from dataclasses import dataclass

import numpy as np

from lexalign.lib.embio import EmbeddingTable
from lexalign.lib.errors import DataError
from lexalign.lib.lexicon import SeedLexicon
from lexalign.lib.retrieval import RetrievalIndex, index_from_mapped
from lexalign.lib.types import FloatArray

logger = logging.getLogger(__name__)


@dataclass(slots=True)
class ProcrustesFit:
    weight: FloatArray
    rank: int

    @property
    def full_rank(self) -> bool:
        return self.rank == self.weight.shape[0]


def fit_procrustes(source_rows: FloatArray, target_rows: FloatArray) -> ProcrustesFit:
    """Orthogonal ``W`` with ``W @ x_k ~ y_k`` for paired rows ``x_k``, ``y_k``."""
    if source_rows.shape != target_rows.shape or source_rows.ndim != 2:
        raise DataError(
            f"paired rows must share one (pairs, d) shape, got "
            f"{source_rows.shape} and {target_rows.shape}"
        )
    if source_rows.shape[0] == 0:
        raise DataError("procrustes needs at least one seed pair")

    covariance = target_rows.astype(np.float64).T @ source_rows.astype(np.float64)
    u, _, vt = np.linalg.svd(covariance)
    rank = int(np.linalg.matrix_rank(covariance))
    if rank < covariance.shape[0]:
        logger.warning(
            "seed cross-covariance has rank %d < %d; the map is not unique",
            rank,
            covariance.shape[0],
        )
    return ProcrustesFit(u @ vt, rank)


def fit_lexicon(
    src: EmbeddingTable, tgt: EmbeddingTable, lexicon: SeedLexicon
) -> ProcrustesFit:
    if not lexicon:
        raise DataError("procrustes needs a non-empty seed lexicon")
    pairs = lexicon.pair_array()
    return fit_procrustes(src.vectors[pairs[:, 0]], tgt.vectors[pairs[:, 1]])


def procrustes_index(
    fit: ProcrustesFit,
    src: EmbeddingTable,
    tgt: EmbeddingTable,
    csls_k: int,
    *,
    block_size: int = 4096,
    workers: int = 1,
) -> RetrievalIndex:
    return index_from_mapped(
        src.words,
        tgt.words,
        src.vectors.astype(np.float64) @ fit.weight.T,
        tgt.vectors.astype(np.float64),
        csls_k,
        block_size=block_size,
        workers=workers,
    )
