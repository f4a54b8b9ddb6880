from enum import StrEnum
from typing import Literal, NotRequired, TypedDict

import numpy as np
import numpy.typing as npt

type FloatArray = npt.NDArray[np.floating]
type IndexArray = npt.NDArray[np.int64]
type ParameterBlocks = dict[str, FloatArray]

type NumericWidth = Literal["single", "double"]
type DistortionMode = Literal["none", "per-word-jitter"]

NUMERIC_DTYPES: dict[str, type[np.floating]] = {
    "single": np.float32,
    "double": np.float64,
}


class Activation(StrEnum):
    LINEAR = "linear"
    TANH = "tanh"
    SIGMOID = "sigmoid"


class Side(StrEnum):
    SOURCE = "source"
    TARGET = "target"


class Projection(StrEnum):
    HOUSEHOLDER = "householder"
    NONE = "none"
    SOFT_ORTHOGONAL = "soft-orthogonal"


class TrainConfig(TypedDict):
    k_hard: int
    k_rand: int
    activation: str
    learning_rate: float
    tau_src: float
    tau_tgt: float
    lambda1: float
    lambda2: float
    iterations: int
    epochs: int
    patience: int
    csls_k: int
    augment_pool: int
    batch_size: int
    rng_seed: int
    self_learning: bool
    validation_fraction: float
    hard_pool: int | None
    max_neighbors: int | None
    n_reflectors: int | None
    projection: str
    orthogonality_weight: float
    use_adapter: bool
    use_rank_loss: bool
    freeze_target: bool
    block_size: int
    workers: int
    reproducible: bool
    numeric_width: NumericWidth


class RunConfig(TrainConfig):
    src_vec: str | None
    tgt_vec: str | None
    train_dict: str | None
    test_dict: str | None
    out_dir: str | None
    max_vocab: int


class ConfigOverrides(TypedDict, total=False):
    k_hard: int | None
    k_rand: int | None
    activation: str | None
    learning_rate: float | None
    tau_src: float | None
    tau_tgt: float | None
    lambda1: float | None
    lambda2: float | None
    iterations: int | None
    epochs: int | None
    patience: int | None
    csls_k: int | None
    augment_pool: int | None
    batch_size: int | None
    rng_seed: int | None
    self_learning: bool | None
    validation_fraction: float | None
    hard_pool: int | None
    max_neighbors: int | None
    n_reflectors: int | None
    projection: str | None
    orthogonality_weight: float | None
    use_adapter: bool | None
    use_rank_loss: bool | None
    freeze_target: bool | None
    block_size: int | None
    workers: int | None
    reproducible: bool | None
    numeric_width: NumericWidth | None
    src_vec: str | None
    tgt_vec: str | None
    train_dict: str | None
    test_dict: str | None
    out_dir: str | None
    max_vocab: int | None


class SynthSpec(TypedDict):
    vocab: int
    dim: int
    noise_sigma: float
    seed_pairs: int
    test_pairs: int
    rng_seed: int
    distortion: NotRequired[DistortionMode]


class HistoryRecord(TypedDict):
    iteration: int
    epoch: int
    loss: float
    val_p1: float | None
    dict_size: int
    wall_ms: int
