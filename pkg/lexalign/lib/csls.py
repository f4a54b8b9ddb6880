"""Cross-domain similarity local scaling (CSLS).

``csls(x, y) = 2 <x, y> - r_T(x) - r_S(y)``, where ``r_T(x)`` is the mean of
the ``k`` largest dot products between ``x`` and the target space and
``r_S(y)`` the same for ``y`` against the source space.
"""

import numpy as np

from lexalign.lib.blocks import run_blocks
from lexalign.lib.errors import ConfigError
from lexalign.lib.types import FloatArray, IndexArray


def csls_penalties(
    queries: FloatArray,
    keys: FloatArray,
    k: int,
    *,
    exclude_self: bool | None = None,
    block_size: int = 4096,
    workers: int = 1,
) -> FloatArray:
    """Mean of the ``k`` largest dot products of each query row with ``keys``.

    When queries and keys are the same matrix (or ``exclude_self`` is set) each
    row's match with itself is left out.
    """
    if exclude_self is None:
        exclude_self = queries is keys
    available = keys.shape[0] - (1 if exclude_self else 0)
    if k < 1:
        raise ConfigError("csls k must be positive")
    if k > available:
        raise ConfigError(f"csls k={k} exceeds the {available} available keys")

    keys64 = keys.astype(np.float64, copy=False)
    penalties = np.empty(queries.shape[0], dtype=np.float64)

    def fill(start: int, stop: int) -> None:
        dots = queries[start:stop].astype(np.float64) @ keys64.T
        if exclude_self:
            rows = np.arange(stop - start)
            dots[rows, rows + start] = -np.inf
        top = np.partition(dots, dots.shape[1] - k, axis=1)[:, -k:]
        penalties[start:stop] = top.mean(axis=1)

    run_blocks(fill, queries.shape[0], block_size, workers)
    return penalties


def csls_score(x_hat: FloatArray, y_hat: FloatArray, r_x: float, r_y: float) -> float:
    return float(2.0 * np.dot(x_hat, y_hat) - r_x - r_y)


def csls_matrix(
    queries: FloatArray,
    keys: FloatArray,
    r_queries: FloatArray,
    r_keys: FloatArray,
) -> FloatArray:
    return (
        2.0 * (queries.astype(np.float64) @ keys.astype(np.float64).T)
        - r_queries[:, None]
        - r_keys[None, :]
    )


def top_k_rows(scores: FloatArray, k: int) -> tuple[IndexArray, FloatArray]:
    """Per row: the ``k`` best columns by descending score, ties by ascending index."""
    if k < 1:
        raise ConfigError(f"k must be at least 1, got {k}")
    n_rows, n_cols = scores.shape
    k = min(k, n_cols)
    indices = np.empty((n_rows, k), dtype=np.int64)
    for row in range(n_rows):
        values = scores[row]
        if k < n_cols:
            threshold = np.partition(values, n_cols - k)[n_cols - k]
            candidates = np.flatnonzero(values >= threshold)
        else:
            candidates = np.arange(n_cols)
        order = np.argsort(-values[candidates], kind="stable")
        indices[row] = candidates[order[:k]]
    return indices, np.take_along_axis(scores, indices, axis=1)


def argmax_rows(scores: FloatArray) -> IndexArray:
    """Column of the row maximum; ``np.argmax`` already returns the first tie."""
    return np.argmax(scores, axis=1).astype(np.int64)
