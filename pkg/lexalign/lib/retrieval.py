import logging
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from lexalign.lib.blocks import iter_blocks
from lexalign.lib.csls import csls_matrix, csls_penalties, top_k_rows
from lexalign.lib.embio import BilingualTables, ContextualTable, EmbeddingTable
from lexalign.lib.errors import ConfigError, DataError
from lexalign.lib.lexicon import SeedLexicon
from lexalign.lib.mapping import AlignmentModel, forward_map
from lexalign.lib.types import FloatArray, Side

logger = logging.getLogger(__name__)


@dataclass(slots=True)
class RetrievalIndex:
    src_words: tuple[str, ...]
    tgt_words: tuple[str, ...]
    mapped_src: FloatArray
    mapped_tgt: FloatArray
    r_src: FloatArray
    r_tgt: FloatArray
    csls_k: int
    block_size: int = 4096

    def scores(self, sources: np.ndarray) -> FloatArray:
        return csls_matrix(
            self.mapped_src[sources], self.mapped_tgt, self.r_src[sources], self.r_tgt
        )


def index_from_mapped(
    src_words: tuple[str, ...],
    tgt_words: tuple[str, ...],
    mapped_src: FloatArray,
    mapped_tgt: FloatArray,
    csls_k: int,
    *,
    block_size: int = 4096,
    workers: int = 1,
) -> RetrievalIndex:
    r_src = csls_penalties(
        mapped_src, mapped_tgt, csls_k, exclude_self=False,
        block_size=block_size, workers=workers,
    )
    r_tgt = csls_penalties(
        mapped_tgt, mapped_src, csls_k, exclude_self=False,
        block_size=block_size, workers=workers,
    )
    return RetrievalIndex(
        src_words, tgt_words, mapped_src, mapped_tgt, r_src, r_tgt, csls_k, block_size
    )


def build_index(
    model: AlignmentModel,
    tables: BilingualTables,
    csls_k: int,
    *,
    pool: int | None = None,
    use_adapter: bool = True,
    block_size: int = 4096,
    workers: int = 1,
) -> RetrievalIndex:
    """Map both vocabularies (or their ``pool`` most frequent words) and
    precompute the CSLS penalties."""
    n_src = len(tables.src) if pool is None else min(pool, len(tables.src))
    n_tgt = len(tables.tgt) if pool is None else min(pool, len(tables.tgt))

    def mapped(side: Side, emb: EmbeddingTable, ctx: ContextualTable, n: int):
        return forward_map(
            model, side, np.arange(n), emb, ctx,
            use_adapter=use_adapter, block_size=block_size, workers=workers,
        )

    return index_from_mapped(
        tables.src.words[:n_src],
        tables.tgt.words[:n_tgt],
        mapped(Side.SOURCE, tables.src, tables.src_ctx, n_src),
        mapped(Side.TARGET, tables.tgt, tables.tgt_ctx, n_tgt),
        csls_k,
        block_size=block_size,
        workers=workers,
    )


def _check_k(k: int) -> None:
    if isinstance(k, bool) or not isinstance(k, int | np.integer) or k < 1:
        raise ConfigError(f"k must be a positive integer, got {k!r}")


def top_k(index: RetrievalIndex, source: int, k: int) -> list[tuple[int, float]]:
    """Targets by descending CSLS; equal scores go to the lower target index."""
    _check_k(k)
    if not 0 <= source < len(index.src_words):
        raise DataError(f"source index {source} out of range")
    indices, values = top_k_rows(index.scores(np.array([source])), k)
    return [(int(j), float(s)) for j, s in zip(indices[0], values[0], strict=True)]


def _ranked_targets(index: RetrievalIndex, sources: list[int], k: int) -> np.ndarray:
    ranked = np.empty((len(sources), min(k, len(index.tgt_words))), dtype=np.int64)
    source_array = np.array(sources, dtype=np.int64)
    for start, stop in iter_blocks(len(sources), index.block_size):
        ranked[start:stop], _ = top_k_rows(index.scores(source_array[start:stop]), k)
    return ranked


def precision_at_k(index: RetrievalIndex, test: SeedLexicon, k: int) -> float:
    """Share of unique test source words with a gold target among the top ``k``."""
    _check_k(k)
    if not test:
        raise DataError("cannot evaluate on an empty test lexicon")
    sources = test.sources
    ranked = _ranked_targets(index, sources, k)
    hits = sum(
        1
        for row, source in enumerate(sources)
        if test.source_gold[source].intersection(ranked[row].tolist())
    )
    return hits / len(sources)


def evaluation_report(
    index: RetrievalIndex, test: SeedLexicon, ks: tuple[int, ...] = (1, 5, 10)
) -> dict[str, float | int]:
    report: dict[str, float | int] = {
        f"p_at_{k}": precision_at_k(index, test, k) for k in ks
    }
    report["n_src_words"] = len(test.sources)
    return report


def induce(
    index: RetrievalIndex,
    out_path: str | Path,
    k: int,
    sources: list[int] | None = None,
) -> int:
    """Write ``<src>\\t<tgt>\\t<score>`` lines, ``k`` per source word."""
    _check_k(k)
    sources = list(range(len(index.src_words))) if sources is None else sources
    source_array = np.array(sources, dtype=np.int64)
    written = 0
    with open(out_path, "w", encoding="utf-8") as handle:
        for start, stop in iter_blocks(len(sources), index.block_size):
            ranked, scores = top_k_rows(index.scores(source_array[start:stop]), k)
            for row, source in enumerate(sources[start:stop]):
                for j, score in zip(ranked[row], scores[row], strict=True):
                    handle.write(
                        f"{index.src_words[source]}\t{index.tgt_words[j]}\t"
                        f"{score:.6f}\n"
                    )
                    written += 1
    logger.info("wrote %d translations for %d source words", written, len(sources))
    return written


def read_translations(path: str | Path) -> list[tuple[str, str, float]]:
    rows = []
    with open(path, encoding="utf-8") as handle:
        for line in handle:
            source, target, score = line.rstrip("\n").split("\t")
            rows.append((source, target, float(score)))
    return rows
