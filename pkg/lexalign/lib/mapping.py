"""Personalized adapters and Householder projections.

A side (source or target) maps a word vector ``x`` with contextual vector
``x_bar`` to ``P @ normalize(x + act(W @ x_bar))`` where
``P = H(v_1) @ H(v_2) @ ... @ H(v_n)`` and ``H(v) = I - 2 v v^T``. Reflectors
are stored as unconstrained raw vectors and normalized on use, so ``P`` is
orthogonal for any parameter values. A side may instead hold a free dense
matrix, kept near orthogonal by a penalty in the objective.
"""

import logging
from collections.abc import Mapping
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Literal

import numpy as np

from lexalign.lib.blocks import run_blocks
from lexalign.lib.container import read_container, write_container
from lexalign.lib.embio import ContextualTable, EmbeddingTable
from lexalign.lib.errors import (
    ConfigError,
    DataError,
    DegenerateVectorError,
    PersistenceError,
)
from lexalign.lib.types import (
    NUMERIC_DTYPES,
    Activation,
    FloatArray,
    ParameterBlocks,
    Projection,
    Side,
)

logger = logging.getLogger(__name__)

EPS_V = 1e-8

PARAMETER_BLOCKS = ("src_adapter", "tgt_adapter", "src_chain", "tgt_chain")

CHECKPOINT_SETTINGS = ("tau_src", "tau_tgt", "use_adapter")

type ChainInit = Literal["random", "identity"]


def activate(activation: Activation, pre: np.ndarray) -> np.ndarray:
    match activation:
        case Activation.LINEAR:
            return pre.copy()
        case Activation.TANH:
            return np.tanh(pre)
        case Activation.SIGMOID:
            # Overflow-free logistic.
            return 0.5 * (1.0 + np.tanh(0.5 * pre))
    raise ConfigError(f"unknown activation {activation!r}")


def activation_slope(
    activation: Activation, pre: np.ndarray, out: np.ndarray
) -> np.ndarray:
    match activation:
        case Activation.LINEAR:
            return np.ones_like(pre)
        case Activation.TANH:
            return 1.0 - out * out
        case Activation.SIGMOID:
            return out * (1.0 - out)
    raise ConfigError(f"unknown activation {activation!r}")


@dataclass(slots=True)
class Adapter:
    weight: FloatArray
    activation: Activation

    def __post_init__(self) -> None:
        self.activation = Activation(self.activation)
        if self.weight.ndim != 2 or self.weight.shape[0] != self.weight.shape[1]:
            raise ConfigError(f"adapter weight must be square, got {self.weight.shape}")
        if not np.all(np.isfinite(self.weight)):
            raise DataError("adapter weight holds non-finite values")

    @property
    def dim(self) -> int:
        return int(self.weight.shape[0])


@dataclass(slots=True)
class HouseholderChain:
    raw_vectors: FloatArray

    def __post_init__(self) -> None:
        if self.raw_vectors.ndim != 2:
            raise ConfigError("raw reflector vectors must form an (n, d) matrix")

    @property
    def n(self) -> int:
        return int(self.raw_vectors.shape[0])

    @property
    def dim(self) -> int:
        return int(self.raw_vectors.shape[1])

    def unit_vectors(self) -> tuple[FloatArray, FloatArray]:
        """Normalized reflectors ``v_i = w_i / |w_i|`` and the raw norms."""
        norms = np.linalg.norm(self.raw_vectors, axis=1)
        small = np.flatnonzero(norms <= EPS_V)
        if small.size:
            raise DegenerateVectorError(
                f"reflector {int(small[0])} has norm {norms[small[0]]:.3g} <= {EPS_V}"
            )
        return self.raw_vectors / norms[:, None], norms


@dataclass(slots=True)
class DenseProjection:
    """Unconstrained square projection, held near orthogonal only by a penalty."""

    matrix: FloatArray

    def __post_init__(self) -> None:
        if self.matrix.ndim != 2 or self.matrix.shape[0] != self.matrix.shape[1]:
            raise ConfigError(
                f"dense projection must be square, got {self.matrix.shape}"
            )

    @property
    def dim(self) -> int:
        return int(self.matrix.shape[0])


type Projector = HouseholderChain | DenseProjection


def projector_block(projector: Projector) -> FloatArray:
    if isinstance(projector, DenseProjection):
        return projector.matrix
    return projector.raw_vectors


@dataclass(slots=True)
class AlignmentModel:
    src_adapter: Adapter
    tgt_adapter: Adapter
    src_chain: Projector
    tgt_chain: Projector

    def __post_init__(self) -> None:
        dims = {
            self.src_adapter.dim,
            self.tgt_adapter.dim,
            self.src_chain.dim,
            self.tgt_chain.dim,
        }
        if len(dims) != 1:
            raise ConfigError(f"model parts disagree on dimensionality: {sorted(dims)}")
        if isinstance(self.src_chain, DenseProjection) != isinstance(
            self.tgt_chain, DenseProjection
        ):
            raise ConfigError("both sides must use the same kind of projection")

    @property
    def dim(self) -> int:
        return self.src_adapter.dim

    @property
    def projection(self) -> Projection:
        if isinstance(self.src_chain, DenseProjection):
            return Projection.SOFT_ORTHOGONAL
        if self.src_chain.n == 0 and self.tgt_chain.n == 0:
            return Projection.NONE
        return Projection.HOUSEHOLDER

    def adapter(self, side: Side) -> Adapter:
        return self.src_adapter if side is Side.SOURCE else self.tgt_adapter

    def chain(self, side: Side) -> Projector:
        return self.src_chain if side is Side.SOURCE else self.tgt_chain

    def parameters(self) -> ParameterBlocks:
        return {
            "src_adapter": self.src_adapter.weight.copy(),
            "tgt_adapter": self.tgt_adapter.weight.copy(),
            "src_chain": projector_block(self.src_chain).copy(),
            "tgt_chain": projector_block(self.tgt_chain).copy(),
        }

    def assign_parameters(self, params: ParameterBlocks) -> None:
        """Install new parameter values.

        A raw reflector whose new norm would fall to ``EPS_V`` or below keeps its
        previous value.
        """
        for name in PARAMETER_BLOCKS:
            if name not in params:
                continue
            value = np.asarray(params[name])
            if not np.all(np.isfinite(value)):
                raise DataError(f"non-finite values in parameter block {name}")
            if name.endswith("chain"):
                chain = self.src_chain if name == "src_chain" else self.tgt_chain
                value = value.copy()
                if isinstance(chain, DenseProjection):
                    chain.matrix = value
                    continue
                rejected = np.linalg.norm(value, axis=1) <= EPS_V
                if rejected.any():
                    logger.debug(
                        "%s: kept %d collapsing reflectors", name, rejected.sum()
                    )
                    value[rejected] = chain.raw_vectors[rejected]
                chain.raw_vectors = value
            else:
                adapter = (
                    self.src_adapter if name == "src_adapter" else self.tgt_adapter
                )
                adapter.weight = value.copy()


def create_householder_chain(
    dim: int,
    n: int | None = None,
    *,
    rng: np.random.Generator,
    dtype: type[np.floating] = np.float64,
    init: ChainInit = "random",
) -> HouseholderChain:
    n = dim if n is None else n
    if n < 0:
        raise ConfigError("chain length must be non-negative")
    if init == "identity":
        if n % 2:
            raise ConfigError("an identity chain needs an even number of reflectors")
        half = rng.normal(0.0, np.sqrt(1.0 / dim), size=(n // 2, dim))
        raw = np.repeat(half, 2, axis=0)
    else:
        raw = rng.normal(0.0, np.sqrt(1.0 / dim), size=(n, dim))
    return HouseholderChain(raw.astype(dtype))


def create_alignment_model(
    dim: int,
    *,
    n_reflectors: int | None = None,
    activation: Activation | str = Activation.TANH,
    seed: int = 0,
    dtype: type[np.floating] = np.float64,
    init: ChainInit = "random",
    projection: Projection | str = Projection.HOUSEHOLDER,
) -> AlignmentModel:
    """Zero adapters and Gaussian (variance 1/d) reflectors on both sides.

    ``projection="none"`` fixes ``P = I`` with empty chains. ``"soft-orthogonal"``
    starts a free matrix from the product of a random chain.
    """
    if dim < 1:
        raise ConfigError("dimension must be positive")
    rng = np.random.default_rng(seed)
    activation = Activation(activation)
    projection = Projection(projection)
    if projection is Projection.NONE:
        n_reflectors = 0

    def chain() -> Projector:
        householder = create_householder_chain(
            dim, n_reflectors, rng=rng, dtype=dtype, init=init
        )
        if projection is Projection.SOFT_ORTHOGONAL:
            return DenseProjection(chain_matrix(householder))
        return householder

    return AlignmentModel(
        src_adapter=Adapter(np.zeros((dim, dim), dtype=dtype), activation),
        tgt_adapter=Adapter(np.zeros((dim, dim), dtype=dtype), activation),
        src_chain=chain(),
        tgt_chain=chain(),
    )


def adapter_calibrate(adapter: Adapter, x: FloatArray, x_bar: FloatArray) -> FloatArray:
    calibrated = x + activate(adapter.activation, adapter.weight @ x_bar)
    norm = np.linalg.norm(calibrated)
    if not norm > EPS_V:
        raise DegenerateVectorError(f"calibrated vector has norm {norm:.3g}")
    return calibrated / norm


def householder_reflect(v_raw: FloatArray, z: FloatArray) -> FloatArray:
    norm = np.linalg.norm(v_raw)
    if not norm > EPS_V:
        raise DegenerateVectorError(f"reflector has norm {norm:.3g}")
    v = v_raw / norm
    return z - 2.0 * np.dot(z, v) * v


def chain_apply(chain: HouseholderChain, z: FloatArray) -> FloatArray:
    """Apply ``H(v_1) ... H(v_n)`` to a vector or to every row of a matrix.

    ``H(v_n)`` acts first. Each reflection costs O(d) per vector.
    """
    if chain.n == 0:
        return np.array(z, copy=True)
    vectors, _ = chain.unit_vectors()
    out = np.array(z, dtype=np.result_type(z, vectors), copy=True)
    if out.ndim == 1:
        for v in vectors[::-1]:
            out -= 2.0 * np.dot(out, v) * v
    else:
        for v in vectors[::-1]:
            out -= 2.0 * np.outer(out @ v, v)
    return out


def chain_matrix(chain: HouseholderChain) -> FloatArray:
    product = np.eye(chain.dim, dtype=chain.raw_vectors.dtype)
    if chain.n == 0:
        return product
    vectors, _ = chain.unit_vectors()
    for v in vectors[::-1]:
        product -= 2.0 * np.outer(v, v @ product)
    return product


def projection_matrix(projector: Projector) -> FloatArray:
    if isinstance(projector, DenseProjection):
        return projector.matrix.copy()
    return chain_matrix(projector)


def project(projector: Projector, z: FloatArray) -> FloatArray:
    """``P z`` for a vector, or ``P`` applied to every row of a matrix."""
    if isinstance(projector, DenseProjection):
        return np.asarray(z) @ projector.matrix.T
    return chain_apply(projector, z)


def _calibrate_rows(
    adapter: Adapter | None,
    rows: FloatArray,
    context: FloatArray,
    words: tuple[str, ...] | None = None,
) -> tuple[FloatArray, FloatArray, FloatArray, FloatArray]:
    if adapter is None:
        pre = np.zeros_like(rows)
        out = pre
        calibrated = rows
    else:
        pre = context @ adapter.weight.T
        out = activate(adapter.activation, pre)
        calibrated = rows + out
    norms = np.linalg.norm(calibrated, axis=1)
    bad = np.flatnonzero(~(norms > EPS_V))
    if bad.size:
        word = words[int(bad[0])] if words is not None else None
        raise DegenerateVectorError("calibrated vector collapsed", word=word)
    return calibrated / norms[:, None], norms, pre, out


def forward_map(
    model: AlignmentModel,
    side: Side | str,
    indices: np.ndarray | list[int] | None,
    emb: EmbeddingTable,
    ctx: ContextualTable,
    *,
    use_adapter: bool = True,
    block_size: int = 4096,
    workers: int = 1,
) -> FloatArray:
    """Unit-norm latent vectors for ``indices`` (all words when ``None``)."""
    side = Side(side)
    if len(ctx) != len(emb) or ctx.dim != emb.dim:
        raise DataError("contextual table is not aligned with the embedding table")
    if indices is None:
        rows = np.arange(len(emb))
    else:
        rows = np.asarray(indices, dtype=np.int64)
    if rows.size and (rows.min() < 0 or rows.max() >= len(emb)):
        raise DataError("word index out of range")

    adapter = model.adapter(side) if use_adapter else None
    chain = model.chain(side)
    dtype = np.result_type(emb.vectors, projector_block(chain))
    out = np.empty((rows.size, emb.dim), dtype=dtype)

    def fill(start: int, stop: int) -> None:
        block = rows[start:stop]
        unit, *_ = _calibrate_rows(
            adapter,
            emb.vectors[block].astype(out.dtype),
            ctx.vectors[block].astype(out.dtype),
            tuple(emb.words[i] for i in block),
        )
        out[start:stop] = project(chain, unit)

    run_blocks(fill, rows.size, block_size, workers)
    return out


@dataclass(slots=True)
class SideCache:
    """Intermediates of one side's batched forward pass, kept for the backward pass."""

    adapter: Adapter | None
    context: FloatArray
    pre: FloatArray
    out: FloatArray
    norms: FloatArray
    unit: FloatArray
    projection: FloatArray
    reflectors: FloatArray | None
    raw_norms: FloatArray | None
    mapped: FloatArray


def side_forward(
    model: AlignmentModel,
    side: Side,
    rows: FloatArray,
    context: FloatArray,
    *,
    use_adapter: bool = True,
) -> SideCache:
    """Dense-matrix forward pass over a batch of rows."""
    adapter = model.adapter(side) if use_adapter else None
    chain = model.chain(side)
    unit, norms, pre, out = _calibrate_rows(adapter, rows, context)
    reflectors = raw_norms = None
    if isinstance(chain, DenseProjection):
        projection = chain.matrix
    else:
        if chain.n:
            reflectors, raw_norms = chain.unit_vectors()
        else:
            reflectors = np.zeros((0, chain.dim), dtype=chain.raw_vectors.dtype)
            raw_norms = np.zeros(0, dtype=chain.raw_vectors.dtype)
        projection = chain_matrix(chain)
    return SideCache(
        adapter=adapter,
        context=context,
        pre=pre,
        out=out,
        norms=norms,
        unit=unit,
        projection=projection,
        reflectors=reflectors,
        raw_norms=raw_norms,
        mapped=unit @ projection.T,
    )


def _reflector_gradients(
    reflectors: FloatArray, raw_norms: FloatArray, grad_projection: FloatArray
) -> FloatArray:
    """Gradient w.r.t. raw reflectors given dL/dP for ``P = H_1 ... H_n``.

    Uses ``dL/dH_i = M_i`` with ``M_1 = G H_n ... H_2`` and
    ``M_{i+1} = H_i M_i H_{i+1}``, so the sweep costs O(n d^2).
    """
    n = reflectors.shape[0]
    if n == 0:
        return np.zeros_like(reflectors)
    m = grad_projection.copy()
    for i in range(n - 1, 0, -1):
        v = reflectors[i]
        m -= 2.0 * np.outer(m @ v, v)

    grad_unit = np.empty_like(reflectors)
    for i in range(n):
        v = reflectors[i]
        grad_unit[i] = -2.0 * (m @ v + m.T @ v)
        if i + 1 < n:
            m -= 2.0 * np.outer(v, v @ m)
            w = reflectors[i + 1]
            m -= 2.0 * np.outer(m @ w, w)

    radial = np.sum(grad_unit * reflectors, axis=1)
    return (grad_unit - radial[:, None] * reflectors) / raw_norms[:, None]


def side_backward(
    cache: SideCache, grad_mapped: FloatArray
) -> tuple[FloatArray | None, FloatArray]:
    """Gradients for the side's adapter weight (``None`` when bypassed) and
    projection block, given dL/d(mapped rows).

    The projection block is the raw reflectors of a chain or the dense matrix.
    """
    grad_projection = grad_mapped.T @ cache.unit
    if cache.reflectors is None or cache.raw_norms is None:
        grad_block = grad_projection
    else:
        grad_block = _reflector_gradients(
            cache.reflectors, cache.raw_norms, grad_projection
        )
    if cache.adapter is None:
        return None, grad_block

    grad_unit = grad_mapped @ cache.projection
    radial = np.sum(grad_unit * cache.unit, axis=1)
    grad_calibrated = (grad_unit - radial[:, None] * cache.unit) / cache.norms[:, None]
    grad_pre = grad_calibrated * activation_slope(
        cache.adapter.activation, cache.pre, cache.out
    )
    return grad_pre.T @ cache.context, grad_block


def orthogonality_error(projector: Projector) -> float:
    """``|P P^T - I|_F``, accumulated in double precision."""
    if isinstance(projector, DenseProjection):
        product = projector.matrix.astype(np.float64)
    else:
        product = chain_matrix(
            HouseholderChain(projector.raw_vectors.astype(np.float64))
        )
    return float(np.linalg.norm(product @ product.T - np.eye(projector.dim)))


def checkpoint_settings(config: Mapping[str, Any]) -> dict[str, Any]:
    """Config values a checkpoint cannot be scored correctly without."""
    return {key: config[key] for key in CHECKPOINT_SETTINGS}


def save_model(
    model: AlignmentModel,
    path: str | Path,
    *,
    settings: Mapping[str, Any] | None = None,
) -> None:
    dtype = model.src_adapter.weight.dtype
    width = next((w for w, t in NUMERIC_DTYPES.items() if dtype == t), None)
    if width is None:
        raise PersistenceError(f"unsupported numeric type {dtype}")
    params = model.parameters()
    header = {
        "dim": model.dim,
        "projection": str(model.projection),
        "n_src": int(params["src_chain"].shape[0]),
        "n_tgt": int(params["tgt_chain"].shape[0]),
        "src_activation": str(model.src_adapter.activation),
        "tgt_activation": str(model.tgt_adapter.activation),
        "numeric_width": width,
        "settings": checkpoint_settings(settings) if settings is not None else {},
    }
    write_container(path, "alignment-model", header, params)


def load_checkpoint(path: str | Path) -> tuple[AlignmentModel, dict[str, Any]]:
    """The model and the settings it was trained with (empty when not recorded)."""
    header, arrays = read_container(path, "alignment-model")
    dim = header.get("dim")
    dtype = NUMERIC_DTYPES.get(header.get("numeric_width", ""))
    expected = {
        "src_adapter": (dim, dim),
        "tgt_adapter": (dim, dim),
        "src_chain": (header.get("n_src"), dim),
        "tgt_chain": (header.get("n_tgt"), dim),
    }
    for name, shape in expected.items():
        block = arrays.get(name)
        if block is None or block.shape != shape or block.dtype != dtype:
            raise PersistenceError(
                f"{path}: parameter block {name} does not match header"
            )
    settings = header.get("settings", {})
    if not isinstance(settings, dict) or not set(settings) <= set(CHECKPOINT_SETTINGS):
        raise PersistenceError(f"{path}: invalid settings in header")
    try:
        projection = Projection(header.get("projection", Projection.HOUSEHOLDER))
        if projection is Projection.SOFT_ORTHOGONAL:
            src_chain: Projector = DenseProjection(arrays["src_chain"])
            tgt_chain: Projector = DenseProjection(arrays["tgt_chain"])
        else:
            src_chain = HouseholderChain(arrays["src_chain"])
            tgt_chain = HouseholderChain(arrays["tgt_chain"])
        model = AlignmentModel(
            src_adapter=Adapter(arrays["src_adapter"], header["src_activation"]),
            tgt_adapter=Adapter(arrays["tgt_adapter"], header["tgt_activation"]),
            src_chain=src_chain,
            tgt_chain=tgt_chain,
        )
    except (KeyError, ValueError) as exc:
        raise PersistenceError(f"{path}: invalid checkpoint ({exc})") from None
    return model, settings


def load_model(path: str | Path) -> AlignmentModel:
    return load_checkpoint(path)[0]
