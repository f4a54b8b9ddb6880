from collections.abc import Mapping
from typing import Any

from lexalign.lib.errors import ConfigError
from lexalign.lib.types import ConfigOverrides, RunConfig

# Keys whose None value is meaningful (e.g. "no cap") and may override a default.
NULLABLE_KEYS = frozenset(
    {"hard_pool", "max_neighbors", "n_reflectors", "out_dir", "test_dict"}
)


def merge_configs(
    base_config: RunConfig,
    config_extension: ConfigOverrides,
    *,
    keep_explicit_none: bool = False,
) -> RunConfig:
    """Layer ``config_extension`` onto a copy of ``base_config``.

    ``None`` values in the extension mean "not given" and are skipped, unless
    ``keep_explicit_none`` is set and the key is nullable (config files).
    """
    if not isinstance(config_extension, Mapping):
        raise ConfigError(
            f"config overrides must be a mapping, got {type(config_extension).__name__}"
        )
    merged: dict[str, Any] = dict(base_config)
    for key, value in config_extension.items():
        if key not in merged:
            raise ConfigError(f"unknown config key {key!r}")
        if value is None and not (keep_explicit_none and key in NULLABLE_KEYS):
            continue
        merged[key] = value
    return merged  # type: ignore[return-value]


def overrides_from_mapping(values: Mapping[str, Any]) -> ConfigOverrides:
    """Translate kebab-case or snake-case keys into a ``ConfigOverrides`` dict."""
    overrides = {key.replace("-", "_"): value for key, value in values.items()}
    return overrides  # type: ignore[return-value]
