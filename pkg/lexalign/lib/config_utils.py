import json
import logging
from pathlib import Path
from typing import Any

import numpy as np

from lexalign.lib.default_config import (
    CONTINUOUS_KEYS,
    SEARCH_SPACE,
    get_default_config,
)
from lexalign.lib.errors import ConfigError
from lexalign.lib.merge_configs import merge_configs
from lexalign.lib.types import (
    NUMERIC_DTYPES,
    Activation,
    Projection,
    RunConfig,
    TrainConfig,
)
from lexalign.lib.validators import (
    ValueValidator,
    is_between,
    is_bool,
    is_fraction,
    is_non_negative,
    is_non_negative_integer,
    is_one_of,
    is_open_unit,
    is_optional,
    is_positive,
    is_positive_integer,
)

logger = logging.getLogger(__name__)

_STRUCTURAL_RULES: dict[str, tuple[ValueValidator, str]] = {
    "k_hard": (is_non_negative_integer, "a non-negative integer"),
    "k_rand": (is_non_negative_integer, "a non-negative integer"),
    "activation": (is_one_of(tuple(Activation)), "one of linear, tanh, sigmoid"),
    "learning_rate": (is_positive, "a positive number"),
    "tau_src": (is_open_unit, "in the open interval (0, 1)"),
    "tau_tgt": (is_open_unit, "in the open interval (0, 1)"),
    "lambda1": (is_non_negative, "a non-negative number"),
    "lambda2": (is_non_negative, "a non-negative number"),
    "iterations": (is_positive_integer, "a positive integer"),
    "epochs": (is_positive_integer, "a positive integer"),
    "patience": (is_positive_integer, "a positive integer"),
    "csls_k": (is_positive_integer, "a positive integer"),
    "augment_pool": (is_positive_integer, "a positive integer"),
    "batch_size": (is_positive_integer, "a positive integer"),
    "rng_seed": (is_non_negative_integer, "a non-negative integer"),
    "self_learning": (is_bool, "a boolean"),
    "validation_fraction": (is_fraction, "in [0, 1)"),
    "hard_pool": (is_optional(is_positive_integer), "null or a positive integer"),
    "max_neighbors": (is_optional(is_positive_integer), "null or a positive integer"),
    "n_reflectors": (is_optional(is_non_negative_integer), "null or an integer >= 0"),
    "projection": (
        is_one_of(tuple(Projection)), "one of householder, none, soft-orthogonal"
    ),
    "orthogonality_weight": (is_non_negative, "a non-negative number"),
    "use_adapter": (is_bool, "a boolean"),
    "use_rank_loss": (is_bool, "a boolean"),
    "freeze_target": (is_bool, "a boolean"),
    "block_size": (is_positive_integer, "a positive integer"),
    "workers": (is_positive_integer, "a positive integer"),
    "reproducible": (is_bool, "a boolean"),
    "numeric_width": (is_one_of(tuple(NUMERIC_DTYPES)), "single or double"),
    "max_vocab": (is_positive_integer, "a positive integer"),
}


def validate_config(config: TrainConfig | RunConfig) -> list[str]:
    """Raise on structurally invalid values; return warnings for out-of-range ones."""
    for key, (validator, description) in _STRUCTURAL_RULES.items():
        if key in config and not validator(config[key]):
            raise ConfigError(f"{key} must be {description}, got {config[key]!r}")

    warnings: list[str] = []
    for key, space in SEARCH_SPACE.items():
        if key not in config:
            continue
        value = config[key]
        if key in CONTINUOUS_KEYS:
            low, high = space
            if not is_between(low, high)(value):
                warnings.append(
                    f"{key}={value} is outside the search range [{low}, {high}]"
                )
        elif value not in space:
            options = ", ".join(str(option) for option in space)
            warnings.append(f"{key}={value} is outside the search set {{{options}}}")

    for message in warnings:
        logger.warning(message)
    return warnings


def load_config_file(path: str | Path, base: RunConfig | None = None) -> RunConfig:
    """Layer a JSON config file onto ``base`` (the defaults when omitted)."""
    try:
        raw = json.loads(Path(path).read_text(encoding="utf-8"))
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config file {path} is not valid JSON: {exc}") from None
    if not isinstance(raw, dict):
        raise ConfigError(f"config file {path} must hold a JSON object")
    base = get_default_config() if base is None else base
    return merge_configs(base, raw, keep_explicit_none=True)


def dump_config(config: TrainConfig | RunConfig, path: str | Path) -> None:
    Path(path).write_text(
        json.dumps(dict(config), indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )


def dtype_for(config: TrainConfig | RunConfig) -> np.dtype[Any]:
    return np.dtype(NUMERIC_DTYPES[config["numeric_width"]])


def effective_workers(config: TrainConfig | RunConfig) -> int:
    return 1 if config["reproducible"] else config["workers"]
