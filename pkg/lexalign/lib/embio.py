import logging
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import numpy.typing as npt

from lexalign.lib.blocks import run_blocks
from lexalign.lib.container import read_container, write_container
from lexalign.lib.errors import (
    ConfigError,
    DataError,
    DegenerateVectorError,
    EmptyTableError,
    PersistenceError,
    VecFormatError,
    VecRowError,
)
from lexalign.lib.types import NUMERIC_DTYPES, FloatArray, IndexArray

logger = logging.getLogger(__name__)

DEFAULT_MAX_VOCAB = 200_000
DEGENERATE_NORM = 1e-12
UNIT_NORM_TOLERANCE = 1e-4


@dataclass(slots=True)
class EmbeddingTable:
    """Frequency-ranked vocabulary (rank 0 = most frequent) and its vectors."""

    words: tuple[str, ...]
    vectors: FloatArray
    word_index: dict[str, int] = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        self.words = tuple(self.words)
        if self.vectors.ndim != 2 or self.vectors.shape[0] != len(self.words):
            raise DataError(
                f"{len(self.words)} words but vectors of shape {self.vectors.shape}"
            )
        self.word_index = {word: i for i, word in enumerate(self.words)}
        if len(self.word_index) != len(self.words):
            raise DataError("duplicate words in embedding table")

    @property
    def dim(self) -> int:
        return int(self.vectors.shape[1])

    def __len__(self) -> int:
        return len(self.words)

    def __contains__(self, word: object) -> bool:
        return word in self.word_index

    def head(self, n: int) -> "EmbeddingTable":
        return EmbeddingTable(self.words[:n], self.vectors[:n])


@dataclass(slots=True)
class ContextualTable:
    """Row i is the mean of every row whose dot product with row i exceeds
    ``threshold`` (the row itself included)."""

    words: tuple[str, ...]
    vectors: FloatArray
    threshold: float
    neighbor_counts: IndexArray

    @property
    def dim(self) -> int:
        return int(self.vectors.shape[1])

    def __len__(self) -> int:
        return len(self.words)


def load_vec_file(
    path: str | Path,
    max_vocab: int = DEFAULT_MAX_VOCAB,
    *,
    dtype: type[np.floating] = np.float64,
) -> EmbeddingTable:
    """Read a fastText-style ``.vec`` text file, keeping file (frequency) order."""
    if max_vocab < 1:
        raise ConfigError("max_vocab must be positive")

    words: list[str] = []
    rows: list[FloatArray] = []
    seen: set[str] = set()
    duplicates = 0

    with open(path, encoding="utf-8") as handle:
        header = handle.readline().split()
        if len(header) != 2 or not all(part.isdigit() for part in header):
            raise VecFormatError(f"{path}: header must be '<count> <dim>'")
        count, dim = int(header[0]), int(header[1])
        if dim < 1:
            raise VecFormatError(f"{path}: dimension must be positive")
        limit = min(count, max_vocab)

        for line_number, line in enumerate(handle, start=2):
            if len(words) >= limit:
                break
            parts = line.rstrip("\n").split()
            if not parts:
                continue
            if len(parts) != dim + 1:
                raise VecRowError(
                    f"expected a word and {dim} values, got {len(parts)} fields",
                    line_number,
                )
            word = parts[0]
            if word in seen:
                duplicates += 1
                continue
            try:
                row = np.array(parts[1:], dtype=np.float64)
            except ValueError:
                raise VecRowError(
                    f"non-numeric value for {word!r}", line_number
                ) from None
            seen.add(word)
            words.append(word)
            rows.append(row)

    if not words:
        raise EmptyTableError(f"{path}: no embedding rows retained")

    logger.info(
        "loaded %d words (dim %d) from %s; header count %d, duplicates skipped %d",
        len(words),
        dim,
        path,
        count,
        duplicates,
    )
    return EmbeddingTable(tuple(words), np.vstack(rows).astype(dtype, copy=False))


def _unit_rows(vectors: np.ndarray, words: tuple[str, ...], stage: str) -> np.ndarray:
    norms = np.linalg.norm(vectors, axis=1)
    degenerate = np.flatnonzero(norms < DEGENERATE_NORM)
    if degenerate.size:
        raise DegenerateVectorError(
            f"zero-norm row at {stage}", word=words[int(degenerate[0])]
        )
    return vectors / norms[:, None]


def length_normalize(
    table: EmbeddingTable,
    *,
    dtype: npt.DTypeLike | None = None,
    stage: str = "length normalization",
) -> EmbeddingTable:
    """Unit rows; computed in double precision, stored as ``dtype``."""
    vectors = _unit_rows(table.vectors.astype(np.float64), table.words, stage)
    return EmbeddingTable(table.words, vectors.astype(dtype or table.vectors.dtype))


def center(
    table: EmbeddingTable, *, dtype: npt.DTypeLike | None = None
) -> EmbeddingTable:
    vectors = table.vectors.astype(np.float64)
    vectors = vectors - vectors.mean(axis=0, keepdims=True)
    return EmbeddingTable(table.words, vectors.astype(dtype or table.vectors.dtype))


def normalization_stages(table: EmbeddingTable) -> list[EmbeddingTable]:
    """Double-precision tables after length normalization, centering, and the
    second length normalization."""
    unit = length_normalize(table, dtype=np.float64, stage="step 1")
    centered = center(unit)
    return [unit, centered, length_normalize(centered, stage="step 3")]


def normalize_pipeline(table: EmbeddingTable) -> EmbeddingTable:
    """Length normalization, centering, then length normalization again."""
    final = normalization_stages(table)[-1]
    return EmbeddingTable(table.words, final.vectors.astype(table.vectors.dtype))


def build_contextual_table(
    table: EmbeddingTable,
    threshold: float,
    max_neighbors: int | None = None,
    *,
    block_size: int = 4096,
    workers: int = 1,
) -> ContextualTable:
    if not 0 < threshold < 1:
        raise ConfigError(f"threshold must lie in (0, 1), got {threshold}")
    if max_neighbors is not None and max_neighbors < 1:
        raise ConfigError("max_neighbors must be positive")

    matrix = table.vectors.astype(np.float64)
    if np.abs(np.linalg.norm(matrix, axis=1) - 1).max() > UNIT_NORM_TOLERANCE:
        raise DataError("contextual vectors need unit-normalized rows")

    n = len(table)
    out = np.empty_like(matrix)
    counts = np.empty(n, dtype=np.int64)

    def fill(start: int, stop: int) -> None:
        sims = matrix[start:stop] @ matrix.T
        mask = sims > threshold
        # Self-similarity rounds to ~1 and always qualifies.
        mask[np.arange(stop - start), np.arange(start, stop)] = True
        block_counts = mask.sum(axis=1)
        if max_neighbors is not None:
            for row in np.flatnonzero(block_counts > max_neighbors):
                masked = np.where(mask[row], sims[row], -np.inf)
                ranked = np.argsort(-masked, kind="stable")
                mask[row] = False
                mask[row, ranked[:max_neighbors]] = True
            block_counts = mask.sum(axis=1)
        out[start:stop] = (mask.astype(np.float64) @ matrix) / block_counts[:, None]
        counts[start:stop] = block_counts

    run_blocks(fill, n, block_size, workers)
    logger.info(
        "contextual table: %d words, tau=%.3f, mean neighbors %.2f, max %d",
        n,
        threshold,
        float(counts.mean()),
        int(counts.max()),
    )
    return ContextualTable(
        words=table.words,
        vectors=out.astype(table.vectors.dtype),
        threshold=float(threshold),
        neighbor_counts=counts,
    )


def _width_of(vectors: np.ndarray) -> str:
    for width, dtype in NUMERIC_DTYPES.items():
        if vectors.dtype == dtype:
            return width
    raise PersistenceError(f"unsupported numeric type {vectors.dtype}")


def save_table(table: EmbeddingTable | ContextualTable, path: str | Path) -> None:
    header = {
        "vocab": len(table.words),
        "dim": table.dim,
        "numeric_width": _width_of(table.vectors),
    }
    arrays = {"words": np.array(table.words, dtype=str), "vectors": table.vectors}
    if isinstance(table, ContextualTable):
        header["threshold"] = table.threshold
        arrays["neighbor_counts"] = table.neighbor_counts
        kind = "contextual-table"
    else:
        kind = "embedding-table"
    write_container(path, kind, header, arrays)


def _load_rows(
    path: str | Path, kind: str
) -> tuple[dict, tuple[str, ...], np.ndarray, dict[str, np.ndarray]]:
    header, arrays = read_container(path, kind)
    words = tuple(str(word) for word in arrays.get("words", np.array([], dtype=str)))
    vectors = arrays.get("vectors")
    if vectors is None:
        raise PersistenceError(f"{path} has no vectors entry")
    expected = (header.get("vocab"), header.get("dim"))
    if vectors.shape != expected or len(words) != expected[0]:
        raise PersistenceError(
            f"{path}: header declares shape {expected}, found vectors {vectors.shape} "
            f"and {len(words)} words"
        )
    width = header.get("numeric_width")
    if width not in NUMERIC_DTYPES or vectors.dtype != NUMERIC_DTYPES[width]:
        raise PersistenceError(f"{path}: numeric width {width!r} does not match data")
    return header, words, vectors, arrays


def load_table(path: str | Path) -> EmbeddingTable:
    _, words, vectors, _ = _load_rows(path, "embedding-table")
    return EmbeddingTable(words, vectors)


def load_contextual_table(path: str | Path) -> ContextualTable:
    header, words, vectors, arrays = _load_rows(path, "contextual-table")
    counts = arrays.get("neighbor_counts")
    if counts is None or counts.shape != (len(words),):
        raise PersistenceError(f"{path}: neighbor counts missing or misshapen")
    return ContextualTable(words, vectors, float(header["threshold"]), counts)


@dataclass(slots=True)
class BilingualTables:
    src: EmbeddingTable
    tgt: EmbeddingTable
    src_ctx: ContextualTable
    tgt_ctx: ContextualTable

    def __post_init__(self) -> None:
        if self.src.dim != self.tgt.dim:
            raise DataError(
                f"source dim {self.src.dim} differs from target dim {self.tgt.dim}"
            )
        if len(self.src_ctx) != len(self.src) or len(self.tgt_ctx) != len(self.tgt):
            raise DataError("contextual tables do not match their embedding tables")

    @property
    def dim(self) -> int:
        return self.src.dim


def write_vec_file(table: EmbeddingTable, path: str | Path) -> None:
    """Write ``table`` in ``.vec`` text form, values as ``%.12g``."""
    with open(path, "w", encoding="utf-8") as handle:
        handle.write(f"{len(table)} {table.dim}\n")
        for word, row in zip(table.words, table.vectors, strict=True):
            handle.write(word + " " + " ".join(f"{value:.12g}" for value in row) + "\n")
