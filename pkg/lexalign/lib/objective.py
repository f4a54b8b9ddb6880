import logging
from dataclasses import dataclass

import numpy as np

from lexalign.lib.csls import csls_score
from lexalign.lib.embio import BilingualTables
from lexalign.lib.errors import ConfigError, NonFiniteLossError, NumericError
from lexalign.lib.mapping import (
    PARAMETER_BLOCKS,
    AlignmentModel,
    DenseProjection,
    side_backward,
    side_forward,
)
from lexalign.lib.types import (
    FloatArray,
    IndexArray,
    ParameterBlocks,
    Side,
    TrainConfig,
)

logger = logging.getLogger(__name__)

# Pairs per einsum chunk; bounds the (pairs, K, d) negative tensor.
PAIR_CHUNK = 64


@dataclass(slots=True)
class CslsPenalties:
    """Penalty terms frozen for an epoch.

    ``r_src[i] = r_T(x_i)`` and ``r_tgt[j] = r_S(y_j)``.
    """

    r_src: FloatArray
    r_tgt: FloatArray


@dataclass(slots=True)
class TrainingBatch:
    src: IndexArray
    tgt: IndexArray
    negatives: IndexArray

    def __post_init__(self) -> None:
        self.src = np.asarray(self.src, dtype=np.int64)
        self.tgt = np.asarray(self.tgt, dtype=np.int64)
        self.negatives = np.asarray(self.negatives, dtype=np.int64)
        if self.negatives.ndim != 2 or self.negatives.shape[0] != self.src.size:
            raise ConfigError("negatives must be a (pairs, K) index matrix")
        if self.src.size == 0 or self.src.size != self.tgt.size:
            raise ConfigError(
                "a batch needs matching, non-empty source and target indices"
            )

    def __len__(self) -> int:
        return int(self.src.size)

    def dump(self) -> dict[str, list]:
        return {
            "src": self.src.tolist(),
            "tgt": self.tgt.tolist(),
            "negatives": self.negatives.tolist(),
        }


@dataclass(slots=True)
class LossBreakdown:
    rank: float
    mse: float
    regularizer: float
    total: float
    orthogonality: float = 0.0


def _log1p_exp(z: np.ndarray) -> np.ndarray:
    """``log(1 + e^z)`` without overflow; ``-log sigmoid(m) = _log1p_exp(-m)``."""
    return np.logaddexp(0.0, z)


def _logistic(z: np.ndarray) -> np.ndarray:
    return 0.5 * (1.0 + np.tanh(0.5 * z))


def rank_loss(
    x_hat: FloatArray,
    y_hat: FloatArray,
    negatives: FloatArray,
    *,
    r_x: float = 0.0,
    r_y: float = 0.0,
    r_negatives: FloatArray | None = None,
) -> float:
    """Mean over negatives of ``-log sigmoid(csls(x, y) - csls(x, y_neg))``."""
    negatives = np.atleast_2d(negatives)
    if negatives.shape[0] < 1:
        raise ConfigError("rank loss needs at least one negative")
    r_negatives = np.zeros(negatives.shape[0]) if r_negatives is None else r_negatives
    positive = csls_score(x_hat, y_hat, r_x, r_y)
    negative = 2.0 * (negatives @ x_hat) - r_x - np.asarray(r_negatives)
    return float(np.mean(_log1p_exp(-(positive - negative))))


def mse_loss(x_hat: FloatArray, y_hat: FloatArray) -> float:
    """Euclidean (unsquared) distance between aligned words."""
    return float(np.linalg.norm(np.asarray(x_hat) - np.asarray(y_hat)))


def regularizer(model: AlignmentModel) -> float:
    return float(sum(np.sum(block**2) for block in model.parameters().values()))


def soft_orthogonality(matrix: FloatArray) -> tuple[float, FloatArray]:
    """``|W W^T - I|_F^2`` and its gradient ``4 (W W^T - I) W``."""
    gap = matrix @ matrix.T - np.eye(matrix.shape[0], dtype=matrix.dtype)
    return float(np.sum(gap**2)), 4.0 * gap @ matrix


def _evaluate(
    batch: TrainingBatch,
    model: AlignmentModel,
    tables: BilingualTables,
    penalties: CslsPenalties,
    config: TrainConfig,
    with_gradients: bool,
) -> tuple[LossBreakdown, ParameterBlocks | None]:
    use_adapter = config["use_adapter"]
    use_rank = config["use_rank_loss"]
    lambda1 = float(config["lambda1"])
    lambda2 = float(config["lambda2"])
    n_pairs, k = batch.negatives.shape
    scale = 1.0 / n_pairs

    targets, inverse = np.unique(
        np.concatenate([batch.tgt, batch.negatives.ravel()]), return_inverse=True
    )
    pos_slot = inverse[:n_pairs]
    neg_slot = inverse[n_pairs:].reshape(n_pairs, k)

    src_cache = side_forward(
        model,
        Side.SOURCE,
        tables.src.vectors[batch.src],
        tables.src_ctx.vectors[batch.src],
        use_adapter=use_adapter,
    )
    tgt_cache = side_forward(
        model,
        Side.TARGET,
        tables.tgt.vectors[targets],
        tables.tgt_ctx.vectors[targets],
        use_adapter=use_adapter,
    )
    x = src_cache.mapped
    y_all = tgt_cache.mapped
    y = y_all[pos_slot]

    grad_x = np.zeros_like(x)
    grad_y_all = np.zeros_like(y_all)

    rank_total = 0.0
    if use_rank and k > 0:
        r_pos = penalties.r_tgt[batch.tgt]
        r_neg = penalties.r_tgt[batch.negatives]
        pos_dot = np.sum(x * y, axis=1)
        for start in range(0, n_pairs, PAIR_CHUNK):
            stop = min(start + PAIR_CHUNK, n_pairs)
            xs = x[start:stop]
            y_neg = y_all[neg_slot[start:stop]]
            neg_dot = np.einsum("pd,pkd->pk", xs, y_neg)
            # r_src cancels between the positive and negative CSLS scores.
            margins = (
                2.0 * (pos_dot[start:stop, None] - neg_dot)
                - r_pos[start:stop, None]
                + r_neg[start:stop]
            )
            rank_total += float(np.sum(np.mean(_log1p_exp(-margins), axis=1)))
            if not with_gradients:
                continue
            coef = -_logistic(-margins) * (scale / k)
            coef_sum = coef.sum(axis=1)
            grad_x[start:stop] += 2.0 * (
                coef_sum[:, None] * y[start:stop] - np.einsum("pk,pkd->pd", coef, y_neg)
            )
            np.add.at(grad_y_all, pos_slot[start:stop], 2.0 * coef_sum[:, None] * xs)
            np.add.at(
                grad_y_all,
                neg_slot[start:stop],
                -2.0 * coef[:, :, None] * xs[:, None, :],
            )

    diff = x - y
    dist = np.linalg.norm(diff, axis=1)
    mse_total = float(dist.sum())
    if with_gradients and lambda1:
        unit_diff = np.divide(
            diff, dist[:, None], out=np.zeros_like(diff), where=dist[:, None] > 0
        )
        grad_x += (lambda1 * scale) * unit_diff
        np.add.at(grad_y_all, pos_slot, -(lambda1 * scale) * unit_diff)

    reg = regularizer(model)
    beta = float(config["orthogonality_weight"])
    soft: dict[str, FloatArray] = {}
    orth_total = 0.0
    for name in ("src_chain", "tgt_chain"):
        projector = getattr(model, name)
        if isinstance(projector, DenseProjection):
            penalty, soft[name] = soft_orthogonality(projector.matrix)
            orth_total += penalty
    total = (
        scale * (rank_total + lambda1 * mse_total) + lambda2 * reg + beta * orth_total
    )
    breakdown = LossBreakdown(
        rank_total * scale, mse_total * scale, reg, total, orth_total
    )
    if not np.isfinite(total):
        dump = {**batch.dump(), "rank": breakdown.rank, "mse": breakdown.mse}
        logger.error("non-finite loss on batch: %s", dump)
        raise NonFiniteLossError(f"non-finite loss {total}", dump)
    if not with_gradients:
        return breakdown, None

    params = model.parameters()
    grads = {name: 2.0 * lambda2 * value for name, value in params.items()}
    if (use_rank and k > 0) or lambda1:
        src_w, src_r = side_backward(src_cache, grad_x)
        tgt_w, tgt_r = side_backward(tgt_cache, grad_y_all)
        grads["src_chain"] += src_r
        grads["tgt_chain"] += tgt_r
        if src_w is not None and tgt_w is not None:
            grads["src_adapter"] += src_w
            grads["tgt_adapter"] += tgt_w
    for name, grad in soft.items():
        grads[name] += beta * grad
    if not use_adapter:
        grads["src_adapter"][...] = 0.0
        grads["tgt_adapter"][...] = 0.0
    if config["freeze_target"]:
        grads["tgt_adapter"][...] = 0.0
        grads["tgt_chain"][...] = 0.0

    for name in PARAMETER_BLOCKS:
        if not np.all(np.isfinite(grads[name])):
            raise NumericError(f"non-finite gradient in parameter block {name}")
    return breakdown, grads


def total_loss(
    batch: TrainingBatch,
    model: AlignmentModel,
    tables: BilingualTables,
    penalties: CslsPenalties,
    config: TrainConfig,
) -> float:
    """``(1/l) sum(rank + lambda1 * dist) + lambda2 * sum ||block||_F^2``.

    Dense projections add ``beta * ||W W^T - I||_F^2`` per side.
    """
    breakdown, _ = _evaluate(batch, model, tables, penalties, config, False)
    return breakdown.total


def loss_and_gradients(
    batch: TrainingBatch,
    model: AlignmentModel,
    tables: BilingualTables,
    penalties: CslsPenalties,
    config: TrainConfig,
) -> tuple[LossBreakdown, ParameterBlocks]:
    breakdown, grads = _evaluate(batch, model, tables, penalties, config, True)
    assert grads is not None
    return breakdown, grads


def gradients(
    batch: TrainingBatch,
    model: AlignmentModel,
    tables: BilingualTables,
    penalties: CslsPenalties,
    config: TrainConfig,
) -> ParameterBlocks:
    return loss_and_gradients(batch, model, tables, penalties, config)[1]
