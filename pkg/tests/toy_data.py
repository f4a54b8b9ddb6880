"""Small deterministic tables and configs shared by the test modules."""

from pathlib import Path

import numpy as np

from lexalign.lib.default_config import get_default_config
from lexalign.lib.embio import (
    BilingualTables,
    ContextualTable,
    EmbeddingTable,
    build_contextual_table,
    normalize_pipeline,
    write_vec_file,
)
from lexalign.lib.lexicon import SeedLexicon
from lexalign.lib.synth import make_synthetic
from lexalign.lib.types import RunConfig, SynthSpec


def unit_rows(rng: np.random.Generator, n: int, dim: int) -> np.ndarray:
    rows = rng.standard_normal((n, dim))
    return rows / np.linalg.norm(rows, axis=1, keepdims=True)


def table(prefix: str, vectors: np.ndarray) -> EmbeddingTable:
    return EmbeddingTable(tuple(f"{prefix}{i}" for i in range(len(vectors))), vectors)


def plain_context(emb: EmbeddingTable) -> ContextualTable:
    """Contextual table equal to the embeddings (every word its own neighborhood)."""
    return ContextualTable(
        emb.words, emb.vectors.copy(), 0.99, np.ones(len(emb), dtype=np.int64)
    )


def plain_tables(src: np.ndarray, tgt: np.ndarray) -> BilingualTables:
    src_table, tgt_table = table("s", src), table("t", tgt)
    return BilingualTables(
        src_table, tgt_table, plain_context(src_table), plain_context(tgt_table)
    )


def random_tables(
    n_src: int = 20, n_tgt: int = 20, dim: int = 8, seed: int = 0, tau: float = 0.5
) -> BilingualTables:
    rng = np.random.default_rng(seed)
    src = normalize_pipeline(table("s", unit_rows(rng, n_src, dim)))
    tgt = normalize_pipeline(table("t", unit_rows(rng, n_tgt, dim)))
    return BilingualTables(
        src, tgt, build_contextual_table(src, tau), build_contextual_table(tgt, tau)
    )


def permuted_tables(
    n: int = 40, dim: int = 16, seed: int = 0
) -> tuple[BilingualTables, np.ndarray]:
    """Target row ``perm[i]`` holds source row ``i``."""
    rng = np.random.default_rng(seed)
    src = unit_rows(rng, n, dim)
    perm = rng.permutation(n)
    tgt = np.empty_like(src)
    tgt[perm] = src
    return plain_tables(src, tgt), perm


def synthetic_tables(
    spec: SynthSpec, tau: float = 0.5
) -> tuple[BilingualTables, SeedLexicon, SeedLexicon]:
    data = make_synthetic(spec)
    src, tgt = normalize_pipeline(data.src), normalize_pipeline(data.tgt)
    tables = BilingualTables(
        src, tgt, build_contextual_table(src, tau), build_contextual_table(tgt, tau)
    )
    return tables, data.seed, data.test


def small_spec(**overrides) -> SynthSpec:
    spec = SynthSpec(
        vocab=60,
        dim=8,
        noise_sigma=0.0,
        seed_pairs=30,
        test_pairs=20,
        rng_seed=3,
        distortion="none",
    )
    spec.update(overrides)  # type: ignore[typeddict-item]
    return spec


def small_config(**overrides) -> RunConfig:
    config = get_default_config()
    config.update(
        {
            "k_hard": 2,
            "k_rand": 2,
            "csls_k": 5,
            "epochs": 3,
            "iterations": 1,
            "batch_size": 8,
            "augment_pool": 60,
            "validation_fraction": 0.2,
            "learning_rate": 0.003,
            "tau_src": 0.5,
            "tau_tgt": 0.5,
            "workers": 1,
        }
    )
    config.update(overrides)  # type: ignore[typeddict-item]
    return config


def write_vec(path: Path, words: list[str], rows: np.ndarray, count: int | None = None):
    with open(path, "w", encoding="utf-8") as handle:
        handle.write(f"{len(words) if count is None else count} {rows.shape[1]}\n")
        for word, row in zip(words, rows, strict=True):
            handle.write(word + " " + " ".join(repr(float(v)) for v in row) + "\n")
    return path


def write_tables(tables: BilingualTables, directory: Path) -> tuple[Path, Path]:
    src_path, tgt_path = directory / "src.vec", directory / "tgt.vec"
    write_vec_file(tables.src, src_path)
    write_vec_file(tables.tgt, tgt_path)
    return src_path, tgt_path
