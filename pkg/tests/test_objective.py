import math

import numpy as np
import pytest

from lexalign.lib.errors import ConfigError, NonFiniteLossError
from lexalign.lib.mapping import create_alignment_model
from lexalign.lib.objective import (
    CslsPenalties,
    TrainingBatch,
    gradients,
    loss_and_gradients,
    mse_loss,
    rank_loss,
    soft_orthogonality,
    total_loss,
)
from tests.toy_data import plain_tables, random_tables, small_config, unit_rows

E = np.eye(4)


def _zero_penalties(tables):
    return CslsPenalties(np.zeros(len(tables.src)), np.zeros(len(tables.tgt)))


def _random_instance(seed: int, activation: str, projection: str = "householder"):
    rng = np.random.default_rng(seed)
    tables = random_tables(n_src=12, n_tgt=12, dim=8, seed=seed)
    model = create_alignment_model(
        8, n_reflectors=8, activation=activation, seed=seed, projection=projection
    )
    model.assign_parameters(
        {
            "src_adapter": rng.normal(0, 0.3, (8, 8)),
            "tgt_adapter": rng.normal(0, 0.3, (8, 8)),
        }
    )
    if projection == "soft-orthogonal":
        params = model.parameters()
        model.assign_parameters(
            {
                "src_chain": params["src_chain"] + rng.normal(0, 0.1, (8, 8)),
                "tgt_chain": params["tgt_chain"] + rng.normal(0, 0.1, (8, 8)),
            }
        )
    src = np.array([0, 3, 3])
    tgt = np.array([1, 4, 5])
    negatives = np.array([[2, 6, 7, 8], [0, 9, 10, 11], [0, 9, 10, 11]])
    penalties = CslsPenalties(rng.uniform(0, 0.5, 12), rng.uniform(0, 0.5, 12))
    config = small_config(activation=activation, lambda1=0.7, lambda2=0.01)
    return TrainingBatch(src, tgt, negatives), model, tables, penalties, config


def test_rank_loss_anchors():
    e1, e2, e3, e4 = E

    assert abs(rank_loss(e1, e2, np.array([e3])) - math.log(2)) <= 1e-12
    # margin -50 sits on the linear tail of -log sigmoid
    assert rank_loss(e1, e2, np.array([e3]), r_y=50.0) == pytest.approx(50.0, abs=1e-12)
    assert rank_loss(
        e1, e2, np.array([e3, e4]), r_negatives=np.array([0.0, 1e6])
    ) == pytest.approx(math.log(2) / 2, abs=1e-12)
    assert rank_loss(e1, e1, np.array([e2])) > 0.0
    with pytest.raises(ConfigError):
        rank_loss(e1, e2, np.zeros((0, 4)))


def test_mse_loss_anchors():
    e1, e2 = E[:2]

    assert mse_loss(e1, e1) == 0.0
    assert mse_loss(e1, e2) == pytest.approx(math.sqrt(2))
    assert mse_loss(e1, -e1) == 2.0


def test_total_loss_with_only_equal_margins_is_ln2():
    tables = plain_tables(E[:1].copy(), E[1:].copy())
    model = create_alignment_model(4, n_reflectors=4, seed=0, init="identity")
    config = small_config(lambda1=0.0, lambda2=0.0)
    batch = TrainingBatch(np.array([0]), np.array([0]), np.array([[1, 2]]))

    loss = total_loss(batch, model, tables, _zero_penalties(tables), config)

    assert abs(loss - math.log(2)) <= 1e-12


def test_repeated_pairs_do_not_change_the_mean():
    batch, model, tables, penalties, config = _random_instance(0, "tanh")
    single = TrainingBatch(batch.src[:1], batch.tgt[:1], batch.negatives[:1])
    double = TrainingBatch(
        np.repeat(batch.src[:1], 2), np.repeat(batch.tgt[:1], 2), np.repeat(batch.negatives[:1], 2, 0)
    )

    assert total_loss(double, model, tables, penalties, config) == pytest.approx(
        total_loss(single, model, tables, penalties, config), abs=1e-12
    )


def test_regularizer_only_gradient_is_exact():
    batch, model, tables, penalties, _ = _random_instance(1, "tanh")
    config = small_config(lambda1=0.0, lambda2=0.05, use_rank_loss=False)

    grads = gradients(batch, model, tables, penalties, config)

    for name, value in model.parameters().items():
        np.testing.assert_array_equal(grads[name], 2 * 0.05 * value)


def _assert_matches_finite_differences(batch, model, tables, penalties, config):
    _, analytic = loss_and_gradients(batch, model, tables, penalties, config)
    base = model.parameters()
    step = 1e-5

    for name, value in base.items():
        for index in np.ndindex(value.shape):
            shifted = {key: block.copy() for key, block in base.items()}
            shifted[name][index] += step
            model.assign_parameters(shifted)
            plus = total_loss(batch, model, tables, penalties, config)
            shifted[name][index] -= 2 * step
            model.assign_parameters(shifted)
            minus = total_loss(batch, model, tables, penalties, config)

            numeric = (plus - minus) / (2 * step)
            exact = analytic[name][index]
            assert abs(numeric - exact) <= 1e-4 * max(abs(numeric), abs(exact), 1e-3), (
                name,
                index,
            )
    model.assign_parameters(base)


@pytest.mark.parametrize("activation", ["linear", "tanh", "sigmoid"])
@pytest.mark.parametrize("seed", [2, 3])
def test_gradients_match_finite_differences(activation, seed):
    _assert_matches_finite_differences(*_random_instance(seed, activation))


@pytest.mark.parametrize("projection", ["none", "soft-orthogonal"])
@pytest.mark.parametrize("beta", [0.0, 0.8])
def test_projection_mode_gradients_match_finite_differences(projection, beta):
    batch, model, tables, penalties, config = _random_instance(4, "tanh", projection)
    config["orthogonality_weight"] = beta

    _assert_matches_finite_differences(batch, model, tables, penalties, config)


def test_soft_orthogonality_penalty_enters_the_loss():
    batch, model, tables, penalties, config = _random_instance(5, "tanh", "soft-orthogonal")
    config["orthogonality_weight"] = 0.0
    without, _ = loss_and_gradients(batch, model, tables, penalties, config)
    config["orthogonality_weight"] = 2.0
    with_penalty, _ = loss_and_gradients(batch, model, tables, penalties, config)

    expected = sum(
        soft_orthogonality(block)[0]
        for name, block in model.parameters().items()
        if name.endswith("chain")
    )
    assert with_penalty.orthogonality == pytest.approx(expected)
    assert with_penalty.total - without.total == pytest.approx(2.0 * expected)
    assert expected > 0.0


def test_soft_orthogonality_of_an_orthogonal_matrix():
    penalty, grad = soft_orthogonality(np.array([[0.0, 1.0], [1.0, 0.0]]))

    assert penalty == 0.0
    np.testing.assert_array_equal(grad, np.zeros((2, 2)))
    assert soft_orthogonality(2 * np.eye(2))[0] == pytest.approx(18.0)


def test_distance_gradient_vanishes_when_spaces_coincide():
    rows = unit_rows(np.random.default_rng(4), 6, 4)
    tables = plain_tables(rows, rows.copy())
    model = create_alignment_model(4, n_reflectors=0, seed=0)
    config = small_config(lambda1=1.0, lambda2=0.0, use_rank_loss=False)
    batch = TrainingBatch(np.arange(3), np.arange(3), np.array([[3], [4], [5]]))

    grads = gradients(batch, model, tables, _zero_penalties(tables), config)

    for value in grads.values():
        assert not value.any()


def test_ablation_switches_zero_their_blocks():
    batch, model, tables, penalties, config = _random_instance(5, "tanh")

    without_adapter = gradients(
        batch, model, tables, penalties, {**config, "use_adapter": False}
    )
    frozen = gradients(batch, model, tables, penalties, {**config, "freeze_target": True})

    assert not without_adapter["src_adapter"].any()
    assert not without_adapter["tgt_adapter"].any()
    assert without_adapter["src_chain"].any()
    assert not frozen["tgt_adapter"].any()
    assert not frozen["tgt_chain"].any()
    assert frozen["src_chain"].any()


def test_non_finite_loss_carries_the_batch():
    batch, model, tables, _, config = _random_instance(6, "tanh")
    penalties = CslsPenalties(np.zeros(12), np.full(12, np.inf))

    with pytest.raises(NonFiniteLossError) as info:
        total_loss(batch, model, tables, penalties, config)

    assert info.value.dump["src"] == [0, 3, 3]


def test_batch_shapes_are_checked():
    with pytest.raises(ConfigError):
        TrainingBatch(np.array([0, 1]), np.array([0, 1]), np.array([[2]]))
    with pytest.raises(ConfigError):
        TrainingBatch(np.array([], dtype=int), np.array([], dtype=int), np.zeros((0, 1)))
