"""Iterative training: epochs of ranking-loss updates, then dictionary augmentation.

Each outer iteration starts a fresh Adam state. Every epoch draws negatives under
the current parameters, runs shuffled mini-batches, and scores the held-out
validation split; the best-scoring parameters are restored before the mapped
spaces propose new mutual-nearest-neighbor pairs.
"""

import json
import logging
import time
from collections.abc import Callable
from dataclasses import dataclass, field
from pathlib import Path
from typing import TextIO

import numpy as np

from lexalign.lib.blocks import iter_blocks
from lexalign.lib.config_utils import effective_workers
from lexalign.lib.csls import argmax_rows
from lexalign.lib.embio import BilingualTables
from lexalign.lib.errors import NumericError
from lexalign.lib.lexicon import IndexPair, SeedLexicon, split_lexicon
from lexalign.lib.mapping import (
    AlignmentModel,
    DenseProjection,
    checkpoint_settings,
    orthogonality_error,
    save_model,
)
from lexalign.lib.negatives import sample_negatives
from lexalign.lib.objective import CslsPenalties, TrainingBatch, loss_and_gradients
from lexalign.lib.optimizer import OptimizerState, adam_step, create_optimizer_state
from lexalign.lib.retrieval import RetrievalIndex, build_index, precision_at_k
from lexalign.lib.types import HistoryRecord, TrainConfig

logger = logging.getLogger(__name__)

ORTHOGONALITY_TOLERANCE = {"double": 1e-10, "single": 1e-5}

type HistorySink = Callable[[HistoryRecord], None]


@dataclass(slots=True)
class AugmentationRecord:
    iteration: int
    added: tuple[IndexPair, ...]
    dict_size: int


@dataclass(slots=True)
class TrainResult:
    model: AlignmentModel
    history: list[HistoryRecord]
    lexicon: SeedLexicon
    validation: SeedLexicon
    augmentations: list[AugmentationRecord] = field(default_factory=list)
    best_val_p1: float | None = None


def mutual_pairs(index: RetrievalIndex) -> list[IndexPair]:
    """Pairs ``(i, j)`` where ``j`` is the CSLS argmax of ``i`` and vice versa.

    Ties go to the lower index in both directions.
    """
    n_src, n_tgt = len(index.src_words), len(index.tgt_words)
    forward = np.empty(n_src, dtype=np.int64)
    best_value = np.full(n_tgt, -np.inf)
    backward = np.zeros(n_tgt, dtype=np.int64)

    for start, stop in iter_blocks(n_src, index.block_size):
        scores = index.scores(np.arange(start, stop))
        forward[start:stop] = argmax_rows(scores)
        column_best = argmax_rows(scores.T)
        column_value = scores[column_best, np.arange(n_tgt)]
        # Blocks arrive in ascending source order; only a strict win moves the argmax.
        better = column_value > best_value
        best_value[better] = column_value[better]
        backward[better] = column_best[better] + start

    return [(i, int(j)) for i, j in enumerate(forward) if backward[j] == i]


def augment_dictionary(
    model: AlignmentModel,
    tables: BilingualTables,
    lexicon: SeedLexicon,
    config: TrainConfig,
) -> SeedLexicon:
    """Union of ``lexicon`` with the mutual CSLS nearest neighbors among the
    ``augment_pool`` most frequent words of each side."""
    pool = config["augment_pool"]
    for side, table in (("source", tables.src), ("target", tables.tgt)):
        if pool > len(table):
            logger.warning(
                "augment_pool=%d exceeds the %s vocabulary (%d words); clamping",
                pool,
                side,
                len(table),
            )
    index = build_index(
        model,
        tables,
        config["csls_k"],
        pool=pool,
        use_adapter=config["use_adapter"],
        block_size=config["block_size"],
        workers=effective_workers(config),
    )
    return lexicon.union(mutual_pairs(index))


def _check_orthogonality(model: AlignmentModel, config: TrainConfig) -> None:
    tolerance = ORTHOGONALITY_TOLERANCE[config["numeric_width"]]
    for name, chain in (("src_chain", model.src_chain), ("tgt_chain", model.tgt_chain)):
        error = orthogonality_error(chain)
        if isinstance(chain, DenseProjection):
            logger.debug("%s: |WW^T - I|_F = %.3g", name, error)
            continue
        if not error <= tolerance:
            raise NumericError(
                f"{name} drifted from orthogonal: |PP^T - I|_F = {error:.3g}"
            )


def _json_sink(handle: TextIO) -> HistorySink:
    def write(record: HistoryRecord) -> None:
        handle.write(json.dumps(record) + "\n")
        handle.flush()

    return write


class _Trainer:
    def __init__(
        self,
        model: AlignmentModel,
        tables: BilingualTables,
        config: TrainConfig,
        sink: HistorySink | None,
        checkpoint_path: str | Path | None,
    ) -> None:
        self.model = model
        self.tables = tables
        self.config = config
        self.sink = sink
        self.checkpoint_path = checkpoint_path
        self.workers = effective_workers(config)
        self.history: list[HistoryRecord] = []

    def index(self) -> RetrievalIndex:
        return build_index(
            self.model,
            self.tables,
            self.config["csls_k"],
            use_adapter=self.config["use_adapter"],
            block_size=self.config["block_size"],
            workers=self.workers,
        )

    def emit(self, record: HistoryRecord) -> None:
        self.history.append(record)
        if self.sink is not None:
            self.sink(record)

    def checkpoint(self) -> None:
        if self.checkpoint_path is not None:
            save_model(
                self.model,
                self.checkpoint_path,
                settings=checkpoint_settings(self.config),
            )

    def run_epoch(
        self,
        lexicon: SeedLexicon,
        index: RetrievalIndex,
        state: OptimizerState,
        rng: np.random.Generator,
    ) -> float:
        config = self.config
        negatives = sample_negatives(
            self.model, lexicon, self.tables, config, rng, index=index
        )
        penalties = CslsPenalties(index.r_src, index.r_tgt)
        pairs = lexicon.pair_array()
        order = rng.permutation(len(pairs))

        weighted = 0.0
        for start, stop in iter_blocks(len(pairs), config["batch_size"]):
            chunk = pairs[order[start:stop]]
            batch = TrainingBatch(
                chunk[:, 0], chunk[:, 1], negatives.for_sources(chunk[:, 0])
            )
            breakdown, grads = loss_and_gradients(
                batch, self.model, self.tables, penalties, config
            )
            updated = adam_step(
                state, self.model.parameters(), grads, config["learning_rate"]
            )
            self.model.assign_parameters(updated)
            weighted += breakdown.total * len(batch)
        return weighted / len(pairs)

    def run_iteration(
        self, iteration: int, lexicon: SeedLexicon, validation: SeedLexicon
    ) -> float | None:
        config = self.config
        state = create_optimizer_state(self.model.parameters())
        index = self.index()
        best_p1: float | None = None
        best_params = None
        stale = 0

        for epoch in range(1, config["epochs"] + 1):
            started = time.perf_counter()
            rng = np.random.default_rng([config["rng_seed"], iteration, epoch])
            loss = self.run_epoch(lexicon, index, state, rng)
            _check_orthogonality(self.model, config)
            index = self.index()
            val_p1 = precision_at_k(index, validation, 1) if validation else None
            elapsed = time.perf_counter() - started
            wall_ms = 0 if config["reproducible"] else int(1000 * elapsed)
            self.emit(
                HistoryRecord(
                    iteration=iteration,
                    epoch=epoch,
                    loss=loss,
                    val_p1=val_p1,
                    dict_size=len(lexicon),
                    wall_ms=wall_ms,
                )
            )
            logger.info(
                "iteration %d epoch %d: loss %.6f val_p1 %s",
                iteration,
                epoch,
                loss,
                "n/a" if val_p1 is None else f"{val_p1:.4f}",
            )
            if val_p1 is None:
                continue
            if best_p1 is None or val_p1 > best_p1:
                best_p1, best_params, stale = val_p1, self.model.parameters(), 0
                self.checkpoint()
            else:
                stale += 1
                if stale >= config["patience"]:
                    logger.info(
                        "early stop at epoch %d; best val_p1 %.4f", epoch, best_p1
                    )
                    break

        if best_params is not None:
            self.model.assign_parameters(best_params)
        else:
            self.checkpoint()
        return best_p1


def train(
    model: AlignmentModel,
    tables: BilingualTables,
    lexicon: SeedLexicon,
    config: TrainConfig,
    *,
    history_path: str | Path | None = None,
    history_sink: HistorySink | None = None,
    checkpoint_path: str | Path | None = None,
) -> TrainResult:
    """Train ``model`` in place and return it with the run's history."""
    lexicon.check_bounds(len(tables.src), len(tables.tgt))
    split = split_lexicon(lexicon, config["validation_fraction"], config["rng_seed"])
    training, validation = split.train, split.validation
    iterations = config["iterations"] if config["self_learning"] else 1
    logger.info(
        "training on %d pairs (%d source words), validating on %d source words, "
        "%d iteration(s)",
        len(training),
        len(training.sources),
        len(validation.sources),
        iterations,
    )

    handle = open(history_path, "w", encoding="utf-8") if history_path else None
    try:
        sinks = [history_sink] if history_sink is not None else []
        if handle is not None:
            sinks.append(_json_sink(handle))

        def sink(record: HistoryRecord) -> None:
            for target in sinks:
                target(record)

        trainer = _Trainer(model, tables, config, sink, checkpoint_path)
        result = TrainResult(model, trainer.history, training, validation)

        for iteration in range(1, iterations + 1):
            result.best_val_p1 = trainer.run_iteration(iteration, training, validation)
            if not config["self_learning"]:
                continue
            augmented = augment_dictionary(model, tables, training, config)
            # Held-out source words stay out of training.
            augmented = augmented.restrict_sources(
                i for i in augmented.source_gold if i not in validation.source_gold
            )
            added = augmented.pairs[len(training) :]
            result.augmentations.append(
                AugmentationRecord(iteration, added, len(augmented))
            )
            logger.info(
                "iteration %d: augmentation added %d pairs, dictionary size %d",
                iteration,
                len(added),
                len(augmented),
            )
            training = augmented

        result.lexicon = training
        return result
    finally:
        if handle is not None:
            handle.close()
