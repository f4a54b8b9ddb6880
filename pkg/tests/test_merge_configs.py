import pytest

from lexalign.lib.default_config import get_default_config
from lexalign.lib.errors import ConfigError
from lexalign.lib.merge_configs import merge_configs, overrides_from_mapping


def test_mergeconfigs_has_correct_behavior():
    result = merge_configs(
        get_default_config(),
        {
            "epochs": 20,
            "activation": "linear",
            "tau_src": None,
            "hard_pool": 5000,
        },
    )

    assert result["epochs"] == 20
    assert result["activation"] == "linear"
    assert result["tau_src"] == 0.9
    assert result["hard_pool"] == 5000
    assert result["k_hard"] == 128


def test_merge_configs_leaves_the_base_untouched():
    base = get_default_config()

    merge_configs(base, {"epochs": 3})

    assert base["epochs"] == 150


def test_explicit_none_only_clears_nullable_keys():
    base = merge_configs(get_default_config(), {"hard_pool": 10, "out_dir": "runs"})

    cleared = merge_configs(
        base, {"hard_pool": None, "out_dir": None, "epochs": None}, keep_explicit_none=True
    )

    assert cleared["hard_pool"] is None
    assert cleared["out_dir"] is None
    assert cleared["epochs"] == 150


def test_unknown_keys_are_rejected():
    with pytest.raises(ConfigError):
        merge_configs(get_default_config(), {"epoch": 3})


def test_overrides_from_mapping_accepts_kebab_case():
    assert overrides_from_mapping({"k-hard": 64, "tau_src": 0.8}) == {
        "k_hard": 64,
        "tau_src": 0.8,
    }


def test_overrides_must_be_a_mapping():
    with pytest.raises(ConfigError, match="mapping"):
        merge_configs(get_default_config(), lambda config: config)  # type: ignore[arg-type]
