import numpy as np
import pytest

from lexalign.lib.csls import csls_matrix, csls_penalties, csls_score, top_k_rows
from lexalign.lib.errors import ConfigError
from tests.toy_data import unit_rows


def brute_force_penalties(queries, keys, k, exclude_self=False):
    penalties = []
    for i, q in enumerate(queries):
        dots = sorted(
            (float(q @ key) for j, key in enumerate(keys) if not (exclude_self and i == j)),
            reverse=True,
        )
        penalties.append(sum(dots[:k]) / k)
    return np.array(penalties)


def test_penalty_examples():
    keys = np.eye(2)
    diagonal = np.array([[np.sqrt(0.5), np.sqrt(0.5)]])

    assert csls_penalties(keys[:1].copy(), keys, 1)[0] == pytest.approx(1.0)
    assert csls_penalties(diagonal, keys, 2)[0] == pytest.approx(np.sqrt(0.5))


def test_penalties_match_sorting():
    rng = np.random.default_rng(0)
    queries, keys = unit_rows(rng, 20, 5), unit_rows(rng, 20, 5)

    np.testing.assert_allclose(
        csls_penalties(queries, keys, 10, block_size=6),
        brute_force_penalties(queries, keys, 10),
        atol=1e-6,
    )
    np.testing.assert_allclose(
        csls_penalties(keys, keys, 10),
        brute_force_penalties(keys, keys, 10, exclude_self=True),
        atol=1e-6,
    )


def test_penalties_need_enough_keys():
    with pytest.raises(ConfigError):
        csls_penalties(np.eye(2), np.eye(2)[:1].copy(), 2)
    with pytest.raises(ConfigError):
        csls_penalties(np.eye(2), np.eye(2), 0)


def test_csls_score_examples():
    e1, e2 = np.eye(2)

    assert csls_score(e1, e1, 1.0, 1.0) == 0.0
    assert csls_score(e1, e2, 0.0, 0.0) == 0.0


def test_csls_matrix_matches_pairwise_scores():
    rng = np.random.default_rng(1)
    x, y = unit_rows(rng, 5, 3), unit_rows(rng, 5, 3)
    r_x = csls_penalties(x, y, 2)
    r_y = csls_penalties(y, x, 2)

    scores = csls_matrix(x, y, r_x, r_y)

    for i in range(5):
        for j in range(5):
            assert scores[i, j] == pytest.approx(csls_score(x[i], y[j], r_x[i], r_y[j]))


def test_top_k_rows_breaks_ties_by_index():
    scores = np.array([[1.0, 2.0, 2.0, 0.0, 2.0]])

    indices, values = top_k_rows(scores, 2)

    assert indices.tolist() == [[1, 2]]
    assert values.tolist() == [[2.0, 2.0]]
    assert top_k_rows(scores, 10)[0].tolist() == [[1, 2, 4, 0, 3]]


def test_top_k_rows_needs_a_positive_k():
    with pytest.raises(ConfigError):
        top_k_rows(np.zeros((2, 3)), 0)
