import logging
from dataclasses import dataclass, field

import numpy as np

from lexalign.lib.blocks import iter_blocks
from lexalign.lib.csls import top_k_rows
from lexalign.lib.embio import BilingualTables
from lexalign.lib.errors import ConfigError
from lexalign.lib.lexicon import SeedLexicon
from lexalign.lib.mapping import AlignmentModel
from lexalign.lib.retrieval import RetrievalIndex, build_index
from lexalign.lib.types import IndexArray, TrainConfig

logger = logging.getLogger(__name__)


@dataclass(slots=True)
class NegativeSet:
    """Per training source word: ``k_hard`` mined and ``k_rand`` uniform targets.

    Row ``r`` of ``hard``/``random`` belongs to ``sources[r]``; every pair of a
    source word reuses that row.
    """

    sources: IndexArray
    hard: IndexArray
    random: IndexArray
    row_of: dict[int, int] = field(init=False, repr=False)

    def __post_init__(self) -> None:
        self.row_of = {int(source): row for row, source in enumerate(self.sources)}

    @property
    def combined(self) -> IndexArray:
        return np.concatenate([self.hard, self.random], axis=1)

    def for_sources(self, sources: IndexArray) -> IndexArray:
        rows = np.fromiter((self.row_of[int(s)] for s in sources), dtype=np.int64)
        return self.combined[rows]


def _check_capacity(
    lexicon: SeedLexicon, n_targets: int, n_candidates: int, k_hard: int, k_rand: int
) -> None:
    for source, gold in lexicon.source_gold.items():
        if n_targets - len(gold) < k_hard + k_rand:
            raise ConfigError(
                f"target vocabulary of {n_targets} words cannot supply {k_hard} hard + "
                f"{k_rand} random distinct negatives for source {source} "
                f"({len(gold)} gold targets)"
            )
        if n_candidates - sum(1 for j in gold if j < n_candidates) < k_hard:
            raise ConfigError(
                f"hard-negative pool of {n_candidates} words is too small for "
                f"k_hard={k_hard}"
            )


def mine_hard_negatives(
    index: RetrievalIndex,
    sources: list[int],
    gold: dict[int, frozenset[int]],
    k_hard: int,
    n_candidates: int,
) -> IndexArray:
    """Walk down each source's CSLS ranking, skipping gold targets."""
    hard = np.empty((len(sources), k_hard), dtype=np.int64)
    if k_hard == 0 or not sources:
        return hard
    source_array = np.array(sources, dtype=np.int64)
    candidate_keys = index.mapped_tgt[:n_candidates]
    candidate_r = index.r_tgt[:n_candidates]
    depth = k_hard + max(len(gold[s]) for s in sources)

    for start, stop in iter_blocks(len(sources), index.block_size):
        block = source_array[start:stop]
        # r_T(x) is constant per row and does not change the ranking.
        sims = index.mapped_src[block] @ candidate_keys.T
        scores = 2.0 * sims - candidate_r[None, :]
        ranked, _ = top_k_rows(scores, depth)
        for row, source in enumerate(block):
            excluded = gold[int(source)]
            picked = [int(j) for j in ranked[row] if int(j) not in excluded]
            hard[start + row] = picked[:k_hard]
    return hard


def draw_random_negatives(
    rng: np.random.Generator,
    n_targets: int,
    k_rand: int,
    excluded: set[int],
) -> list[int]:
    """Uniform draws over the target vocabulary, redrawing excluded or repeated ones."""
    taken: list[int] = []
    seen = set(excluded)
    while len(taken) < k_rand:
        for j in rng.integers(0, n_targets, size=2 * (k_rand - len(taken)) + 4):
            j = int(j)
            if j in seen:
                continue
            seen.add(j)
            taken.append(j)
            if len(taken) == k_rand:
                break
    return taken


def sample_negatives(
    model: AlignmentModel,
    lexicon: SeedLexicon,
    tables: BilingualTables,
    config: TrainConfig,
    rng: np.random.Generator,
    *,
    index: RetrievalIndex | None = None,
) -> NegativeSet:
    """Dynamic hard negatives under the current parameters plus uniform ones."""
    if not lexicon:
        raise ConfigError("cannot sample negatives for an empty lexicon")
    k_hard, k_rand = config["k_hard"], config["k_rand"]
    n_targets = len(tables.tgt)
    hard_pool = config["hard_pool"]
    n_candidates = n_targets if hard_pool is None else min(hard_pool, n_targets)
    _check_capacity(lexicon, n_targets, n_candidates, k_hard, k_rand)

    if index is None:
        index = build_index(
            model,
            tables,
            config["csls_k"],
            use_adapter=config["use_adapter"],
            block_size=config["block_size"],
        )

    sources = lexicon.sources
    hard = mine_hard_negatives(
        index, sources, lexicon.source_gold, k_hard, n_candidates
    )
    random = np.empty((len(sources), k_rand), dtype=np.int64)
    for row, source in enumerate(sources):
        excluded = set(lexicon.source_gold[source]) | set(hard[row].tolist())
        random[row] = draw_random_negatives(rng, n_targets, k_rand, excluded)

    return NegativeSet(np.array(sources, dtype=np.int64), hard, random)
