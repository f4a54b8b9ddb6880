"""Benchmarks for lexalign core hot paths."""

import time

import numpy as np

from lexalign import get_default_config
from lexalign.lib.csls import csls_penalties
from lexalign.lib.embio import (
    BilingualTables,
    EmbeddingTable,
    build_contextual_table,
    normalize_pipeline,
)
from lexalign.lib.lexicon import SeedLexicon
from lexalign.lib.mapping import (
    chain_apply,
    chain_matrix,
    create_alignment_model,
    create_householder_chain,
)
from lexalign.lib.negatives import sample_negatives
from lexalign.lib.objective import CslsPenalties, TrainingBatch, loss_and_gradients
from lexalign.lib.retrieval import build_index


def bench(name: str, fn, iterations: int = 100):
    # Warmup
    for _ in range(3):
        fn()

    start = time.perf_counter_ns()
    for _ in range(iterations):
        fn()
    elapsed_ns = time.perf_counter_ns() - start

    per_call_us = elapsed_ns / iterations / 1000
    total_ms = elapsed_ns / 1_000_000

    print(
        f"  {name:.<50} {per_call_us:>10.1f} us/call  ({total_ms:.1f}ms total, {iterations:,} iters)"
    )
    return per_call_us


def _table(prefix: str, rng: np.random.Generator, n: int, dim: int) -> EmbeddingTable:
    rows = rng.standard_normal((n, dim))
    words = tuple(f"{prefix}{i}" for i in range(n))
    return normalize_pipeline(EmbeddingTable(words, rows))


def main():
    rng = np.random.default_rng(0)
    print("\n=== lexalign Benchmarks ===\n")

    # --- Householder chains ---
    print("[ Householder chain, d = n = 300 ]")
    chain = create_householder_chain(300, rng=rng)
    z = rng.standard_normal(300)
    vector_us = bench("chain_apply: one vector", lambda: chain_apply(chain, z))
    dense_us = bench(
        "chain_matrix then matvec", lambda: chain_matrix(chain) @ z, iterations=20
    )
    print(f"  speedup of the reflector sweep: {dense_us / vector_us:.1f}x (expect >= 5x)")
    batch = rng.standard_normal((512, 300))
    bench("chain_apply: 512 rows", lambda: chain_apply(chain, batch), iterations=20)

    print()

    # --- Contextual table and CSLS ---
    print("[ Tables, 5000 x 300 ]")
    src = _table("s", rng, 5000, 300)
    tgt = _table("t", rng, 5000, 300)
    bench(
        "build_contextual_table (tau 0.9)",
        lambda: build_contextual_table(src, 0.9),
        iterations=3,
    )
    bench(
        "csls_penalties (k 10)",
        lambda: csls_penalties(src.vectors, tgt.vectors, 10),
        iterations=3,
    )

    print()

    # --- Training step ---
    print("[ Training step, batch 512 ]")
    config = get_default_config()
    tables = BilingualTables(
        src, tgt, build_contextual_table(src, 0.9), build_contextual_table(tgt, 0.9)
    )
    model = create_alignment_model(300, seed=0)
    lexicon = SeedLexicon(tuple((i, i) for i in range(512)))
    index = build_index(model, tables, config["csls_k"])
    bench("build_index", lambda: build_index(model, tables, config["csls_k"]), iterations=3)
    negatives = sample_negatives(model, lexicon, tables, config, rng, index=index)
    pairs = lexicon.pair_array()
    step = TrainingBatch(pairs[:, 0], pairs[:, 1], negatives.for_sources(pairs[:, 0]))
    penalties = CslsPenalties(index.r_src, index.r_tgt)
    bench(
        "loss_and_gradients",
        lambda: loss_and_gradients(step, model, tables, penalties, config),
        iterations=5,
    )

    print()


if __name__ == "__main__":
    main()
