import numpy as np

from lexalign.lib.lexicon import SeedLexicon
from lexalign.lib.mapping import create_alignment_model, orthogonality_error
from lexalign.lib.negatives import sample_negatives
from lexalign.lib.objective import CslsPenalties, TrainingBatch, gradients
from lexalign.lib.optimizer import adam_step, create_optimizer_state
from lexalign.lib.retrieval import build_index
from tests.toy_data import random_tables, small_config


def test_first_step_moves_by_the_learning_rate():
    params = {"w": np.array([[1.0, -2.0], [0.5, 3.0]])}
    grads = {"w": np.array([[0.5, -0.25], [2.0, -1.0]])}

    updated = adam_step(create_optimizer_state(params), params, grads, 0.01)

    np.testing.assert_allclose(
        updated["w"] - params["w"], -0.01 * np.sign(grads["w"]), rtol=1e-6
    )


def test_zero_gradient_leaves_parameters_unchanged():
    params = {"w": np.arange(4.0).reshape(2, 2)}
    state = create_optimizer_state(params)

    updated = adam_step(state, params, {"w": np.zeros((2, 2))}, 0.1)

    np.testing.assert_array_equal(updated["w"], params["w"])
    assert state.step == 1


def test_adam_is_deterministic():
    params = {"a": np.ones(3), "b": np.zeros((2, 2))}
    grads = {"a": np.array([0.1, -0.2, 0.3]), "b": np.array([[1.0, 0.0], [0.0, -1.0]])}
    runs = []
    for _ in range(2):
        state = create_optimizer_state(params)
        current = params
        for _ in range(2):
            current = adam_step(state, current, grads, 0.002)
        runs.append(current)

    for name in params:
        np.testing.assert_array_equal(runs[0][name], runs[1][name])
    assert create_optimizer_state(params).first_moment["b"].shape == (2, 2)


def test_chains_stay_orthogonal_under_adam():
    tables = random_tables(n_src=15, n_tgt=15, dim=8, seed=1)
    model = create_alignment_model(8, seed=1)
    config = small_config(k_hard=2, k_rand=2, csls_k=3)
    lexicon = SeedLexicon(tuple((i, i) for i in range(6)))
    pairs = lexicon.pair_array()
    state = create_optimizer_state(model.parameters())

    for step in range(50):
        index = build_index(model, tables, 3)
        negatives = sample_negatives(
            model, lexicon, tables, config, np.random.default_rng(step), index=index
        )
        batch = TrainingBatch(pairs[:, 0], pairs[:, 1], negatives.for_sources(pairs[:, 0]))
        grads = gradients(
            batch, model, tables, CslsPenalties(index.r_src, index.r_tgt), config
        )
        model.assign_parameters(adam_step(state, model.parameters(), grads, 0.01))

    assert orthogonality_error(model.src_chain) <= 1e-10
    assert orthogonality_error(model.tgt_chain) <= 1e-10
