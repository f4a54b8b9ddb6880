import os

from lexalign.lib.types import RunConfig

WORKERS_ENV_VAR = "LEXALIGN_WORKERS"

# Search space for the tunable hyper-parameters. Values outside these ranges are
# allowed but reported.
SEARCH_SPACE: dict[str, tuple[float, float] | tuple[object, ...]] = {
    "k_hard": (64, 128, 192, 256),
    "k_rand": (64, 128, 192, 256),
    "activation": ("linear", "tanh", "sigmoid"),
    "learning_rate": (0.001, 0.003),
    "tau_src": (0.7, 0.99),
    "tau_tgt": (0.7, 0.99),
    "lambda1": (0.5, 2.5),
    "lambda2": (0.001, 0.1),
}

CONTINUOUS_KEYS = frozenset(
    {"learning_rate", "tau_src", "tau_tgt", "lambda1", "lambda2"}
)


def default_workers() -> int:
    raw = os.environ.get(WORKERS_ENV_VAR, "").strip()
    if raw.isdigit() and int(raw) > 0:
        return int(raw)
    return 1


def get_default_config() -> RunConfig:
    return {
        "k_hard": 128,
        "k_rand": 128,
        "activation": "tanh",
        "learning_rate": 0.002,
        "tau_src": 0.9,
        "tau_tgt": 0.9,
        "lambda1": 1.0,
        "lambda2": 0.001,
        "iterations": 5,
        "epochs": 150,
        "patience": 10,
        "csls_k": 10,
        "augment_pool": 15000,
        "batch_size": 512,
        "rng_seed": 0,
        "self_learning": True,
        "validation_fraction": 0.1,
        "hard_pool": None,
        "max_neighbors": None,
        "n_reflectors": None,
        "projection": "householder",
        "orthogonality_weight": 1.0,
        "use_adapter": True,
        "use_rank_loss": True,
        "freeze_target": False,
        "block_size": 4096,
        "workers": default_workers(),
        "reproducible": True,
        "numeric_width": "double",
        "src_vec": None,
        "tgt_vec": None,
        "train_dict": None,
        "test_dict": None,
        "out_dir": None,
        "max_vocab": 200000,
    }
