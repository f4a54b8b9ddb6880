"""Synthetic bilingual data with a known rotation between the two spaces."""

import logging
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from lexalign.lib.embio import EmbeddingTable, write_vec_file
from lexalign.lib.errors import ConfigError
from lexalign.lib.lexicon import SeedLexicon, write_dictionary
from lexalign.lib.mapping import chain_matrix, create_householder_chain
from lexalign.lib.types import FloatArray, SynthSpec

logger = logging.getLogger(__name__)

SOURCE_VEC = "src.vec"
TARGET_VEC = "tgt.vec"
SEED_DICT = "seed.dict"
TEST_DICT = "test.dict"


@dataclass(slots=True)
class SyntheticData:
    src: EmbeddingTable
    tgt: EmbeddingTable
    rotation: FloatArray
    seed: SeedLexicon
    test: SeedLexicon


@dataclass(slots=True)
class SyntheticPaths:
    src_vec: Path
    tgt_vec: Path
    seed_dict: Path
    test_dict: Path


def check_synth_spec(spec: SynthSpec) -> None:
    if spec["vocab"] < 1 or spec["dim"] < 1:
        raise ConfigError("vocab and dim must be positive")
    if not spec["noise_sigma"] >= 0:
        raise ConfigError(f"noise_sigma must be >= 0, got {spec['noise_sigma']}")
    if spec["seed_pairs"] < 0 or spec["test_pairs"] < 0:
        raise ConfigError("pair counts must be non-negative")
    if spec["seed_pairs"] + spec["test_pairs"] > spec["vocab"]:
        raise ConfigError(
            f"seed_pairs + test_pairs = {spec['seed_pairs'] + spec['test_pairs']} "
            f"exceeds vocab {spec['vocab']}"
        )
    if spec.get("distortion", "per-word-jitter") not in ("none", "per-word-jitter"):
        raise ConfigError(f"unknown distortion {spec.get('distortion')!r}")


def make_synthetic(spec: SynthSpec) -> SyntheticData:
    """``y_i = normalize(Q x_i + sigma g_i)`` for a random orthogonal ``Q``.

    Source word ``s{i}`` translates to ``t{i}``; target rows are stored in a
    shuffled order so the two vocabularies are not rank-aligned.
    """
    check_synth_spec(spec)
    n, d = spec["vocab"], spec["dim"]
    rng = np.random.default_rng(spec["rng_seed"])

    x = rng.standard_normal((n, d))
    x /= np.linalg.norm(x, axis=1, keepdims=True)
    rotation = chain_matrix(create_householder_chain(d, rng=rng))
    y = x @ rotation.T
    if spec.get("distortion", "per-word-jitter") == "per-word-jitter":
        y = y + spec["noise_sigma"] * rng.standard_normal((n, d))
    y /= np.linalg.norm(y, axis=1, keepdims=True)

    order = rng.permutation(n)
    tgt_words = tuple(f"t{i}" for i in order)
    row_of = {int(i): row for row, i in enumerate(order)}

    paired = rng.permutation(n)
    n_seed, n_test = spec["seed_pairs"], spec["test_pairs"]
    seed = SeedLexicon(tuple((int(i), row_of[int(i)]) for i in paired[:n_seed]))
    test = SeedLexicon(
        tuple((int(i), row_of[int(i)]) for i in paired[n_seed : n_seed + n_test])
    )
    return SyntheticData(
        src=EmbeddingTable(tuple(f"s{i}" for i in range(n)), x),
        tgt=EmbeddingTable(tgt_words, y[order]),
        rotation=rotation,
        seed=seed,
        test=test,
    )


def write_synthetic(data: SyntheticData, out_dir: str | Path) -> SyntheticPaths:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = SyntheticPaths(
        out / SOURCE_VEC, out / TARGET_VEC, out / SEED_DICT, out / TEST_DICT
    )
    write_vec_file(data.src, paths.src_vec)
    write_vec_file(data.tgt, paths.tgt_vec)
    write_dictionary(data.seed, data.src, data.tgt, paths.seed_dict)
    write_dictionary(data.test, data.src, data.tgt, paths.test_dict)
    logger.info(
        "synthetic data in %s: %d words, dim %d, %d seed / %d test pairs",
        out,
        len(data.src),
        data.src.dim,
        len(data.seed),
        len(data.test),
    )
    return paths


def generate_synthetic(spec: SynthSpec, out_dir: str | Path) -> SyntheticPaths:
    return write_synthetic(make_synthetic(spec), out_dir)
