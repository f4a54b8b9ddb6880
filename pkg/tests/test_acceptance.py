"""End-to-end runs on the synthetic rotation task (``pytest -m slow``)."""

import numpy as np
import pytest

from lexalign.lib.csls import argmax_rows
from lexalign.lib.mapping import create_alignment_model
from lexalign.lib.procrustes import fit_lexicon, procrustes_index
from lexalign.lib.retrieval import build_index, precision_at_k
from lexalign.lib.training import train
from tests.toy_data import small_config, small_spec, synthetic_tables

pytestmark = pytest.mark.slow


def _spec(**overrides):
    settings = {"vocab": 1000, "dim": 32, "seed_pairs": 200, "test_pairs": 200, "rng_seed": 0}
    return small_spec(**{**settings, **overrides})


def _config(**overrides):
    config = small_config(
        k_hard=64,
        k_rand=64,
        csls_k=10,
        epochs=150,
        batch_size=20,
        augment_pool=1000,
        validation_fraction=0.1,
        tau_src=0.9,
        tau_tgt=0.9,
    )
    config.update(overrides)  # type: ignore[typeddict-item]
    return config


def _procrustes_p1(tables, seed, test):
    fit = fit_lexicon(tables.src, tables.tgt, seed)
    return precision_at_k(procrustes_index(fit, tables.src, tables.tgt, 10), test, 1)


def _train_p1(tables, seed, test, config):
    model = create_alignment_model(tables.dim, seed=config["rng_seed"])
    result = train(model, tables, seed, config)
    index = build_index(result.model, tables, config["csls_k"])
    return result, precision_at_k(index, test, 1)


def test_supervised_recovery_matches_procrustes():
    spec = _spec(noise_sigma=0.0, distortion="none")
    tables, seed, test = synthetic_tables(spec, tau=0.9)
    baseline = _procrustes_p1(tables, seed, test)

    result, p1 = _train_p1(tables, seed, test, _config(self_learning=False))

    assert baseline == 1.0
    assert p1 >= 0.99
    assert p1 >= baseline - 0.01

    losses = [record["loss"] for record in result.history]
    val = [record["val_p1"] for record in result.history]
    best_epoch = int(np.argmax(val))
    assert losses[best_epoch] <= losses[0]
    assert min(losses) < losses[0]


def test_self_learning_grows_the_dictionary_without_losing_precision():
    spec = _spec(noise_sigma=0.05, seed_pairs=50, distortion="per-word-jitter")
    tables, seed, test = synthetic_tables(spec, tau=0.9)
    config = _config(iterations=5, self_learning=True)

    _, supervised_p1 = _train_p1(tables, seed, test, _config(self_learning=False))
    result, semi_p1 = _train_p1(tables, seed, test, config)

    sizes = [record.dict_size for record in result.augmentations]
    assert len(sizes) == 5
    assert sizes == sorted(sizes)
    assert semi_p1 >= supervised_p1 - 0.01

    # The last augmentation ran against the final model.
    index = build_index(result.model, tables, config["csls_k"], pool=config["augment_pool"])
    scores = index.scores(np.arange(len(index.src_words)))
    forward = argmax_rows(scores)
    backward = argmax_rows(scores.T)
    for i, j in result.augmentations[-1].added:
        assert forward[i] == j
        assert backward[j] == i
