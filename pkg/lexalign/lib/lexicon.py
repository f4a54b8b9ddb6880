import logging
from collections.abc import Iterable
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from lexalign.lib.embio import EmbeddingTable
from lexalign.lib.errors import ConfigError, DataError, DictionaryLineError
from lexalign.lib.types import IndexArray

logger = logging.getLogger(__name__)

type IndexPair = tuple[int, int]


@dataclass(slots=True)
class SeedLexicon:
    pairs: tuple[IndexPair, ...]
    source_gold: dict[int, frozenset[int]] = field(init=False, compare=False)

    def __post_init__(self) -> None:
        self.pairs = tuple((int(i), int(j)) for i, j in self.pairs)
        if len(set(self.pairs)) != len(self.pairs):
            raise DataError("seed lexicon contains duplicate pairs")
        grouped: dict[int, set[int]] = {}
        for i, j in self.pairs:
            grouped.setdefault(i, set()).add(j)
        self.source_gold = {i: frozenset(js) for i, js in grouped.items()}

    @classmethod
    def from_pairs(cls, pairs: Iterable[IndexPair]) -> "SeedLexicon":
        """Collapse duplicates, keeping first-occurrence order."""
        return cls(tuple(dict.fromkeys((int(i), int(j)) for i, j in pairs)))

    def __len__(self) -> int:
        return len(self.pairs)

    def __bool__(self) -> bool:
        return bool(self.pairs)

    @property
    def sources(self) -> list[int]:
        """Unique source indices in first-occurrence order."""
        return list(dict.fromkeys(i for i, _ in self.pairs))

    def pair_array(self) -> IndexArray:
        return np.array(self.pairs, dtype=np.int64).reshape(-1, 2)

    def union(self, other: "SeedLexicon | Iterable[IndexPair]") -> "SeedLexicon":
        extra = other.pairs if isinstance(other, SeedLexicon) else other
        return SeedLexicon.from_pairs([*self.pairs, *extra])

    def restrict_sources(self, sources: Iterable[int]) -> "SeedLexicon":
        keep = set(sources)
        return SeedLexicon(tuple(pair for pair in self.pairs if pair[0] in keep))

    def check_bounds(self, n_src: int, n_tgt: int) -> None:
        for i, j in self.pairs:
            if not (0 <= i < n_src and 0 <= j < n_tgt):
                raise DataError(f"pair ({i}, {j}) out of range for {n_src}x{n_tgt}")


@dataclass(slots=True)
class ParseReport:
    kept: int = 0
    skipped_oov: int = 0
    skipped_dup: int = 0

    def as_lines(self) -> list[str]:
        return [
            f"kept={self.kept}",
            f"skipped_oov={self.skipped_oov}",
            f"skipped_dup={self.skipped_dup}",
        ]


@dataclass(slots=True)
class LexiconSplit:
    train: SeedLexicon
    validation: SeedLexicon
    split_fraction: float
    seed: int


def parse_dictionary(
    path: str | Path, src: EmbeddingTable, tgt: EmbeddingTable
) -> tuple[SeedLexicon, ParseReport]:
    """Read "<src-word> <tgt-word>" lines; out-of-vocabulary pairs are skipped."""
    report = ParseReport()
    pairs: dict[IndexPair, None] = {}
    try:
        handle = open(path, encoding="utf-8")
    except OSError as exc:
        raise DataError(f"cannot read dictionary {path}: {exc}") from None

    with handle:
        for line_number, line in enumerate(handle, start=1):
            tokens = line.split()
            if not tokens:
                continue
            if len(tokens) != 2:
                raise DictionaryLineError(
                    f"expected 2 tokens, got {len(tokens)}", line_number
                )
            source, target = tokens
            if source not in src or target not in tgt:
                report.skipped_oov += 1
                continue
            pair = (src.word_index[source], tgt.word_index[target])
            if pair in pairs:
                report.skipped_dup += 1
                continue
            pairs[pair] = None

    report.kept = len(pairs)
    logger.info("dictionary %s: %s", path, " ".join(report.as_lines()))
    if report.skipped_oov:
        logger.warning(
            "%s: skipped %d out-of-vocabulary pairs", path, report.skipped_oov
        )
    return SeedLexicon(tuple(pairs)), report


def write_dictionary(
    lexicon: SeedLexicon, src: EmbeddingTable, tgt: EmbeddingTable, path: str | Path
) -> None:
    lines = [f"{src.words[i]} {tgt.words[j]}\n" for i, j in lexicon.pairs]
    Path(path).write_text("".join(lines), encoding="utf-8")


def split_lexicon(lexicon: SeedLexicon, fraction: float, seed: int) -> LexiconSplit:
    """Hold out ``fraction`` of the unique source words (with all their pairs)."""
    if not 0 <= fraction < 1:
        raise ConfigError(f"split fraction must lie in [0, 1), got {fraction}")

    sources = lexicon.sources
    n_validation = int(round(fraction * len(sources)))
    if n_validation >= len(sources):
        raise ConfigError(
            f"fraction {fraction} leaves no training source words "
            f"({len(sources)} available)"
        )

    order = np.random.default_rng(seed).permutation(len(sources))
    held_out = {sources[k] for k in order[:n_validation]}
    train = SeedLexicon(tuple(p for p in lexicon.pairs if p[0] not in held_out))
    validation = SeedLexicon(tuple(p for p in lexicon.pairs if p[0] in held_out))
    return LexiconSplit(train, validation, fraction, seed)
