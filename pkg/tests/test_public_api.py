import numpy as np

import lexalign
from lexalign import (
    create_alignment_model,
    csls_score,
    get_default_config,
    merge_configs,
    validators,
)


def test_has_correct_export_types():
    for name in lexalign.__all__:
        assert hasattr(lexalign, name), name
    assert isinstance(lexalign.__version__, str)
    assert callable(get_default_config)
    assert callable(merge_configs)

    validator_methods = [
        "is_integer",
        "is_number",
        "is_bool",
        "is_positive_integer",
        "is_non_negative_integer",
        "is_non_negative",
        "is_positive",
        "is_open_unit",
        "is_fraction",
        "is_optional",
        "is_one_of",
        "is_between",
    ]
    for method in validator_methods:
        assert callable(getattr(validators, method))


def test_validators_have_correct_inputs_and_outputs():
    assert isinstance(validators.is_integer(""), bool)
    assert isinstance(validators.is_number(""), bool)
    assert isinstance(validators.is_open_unit(""), bool)
    assert isinstance(validators.is_fraction(""), bool)
    assert isinstance(validators.is_optional(validators.is_integer)(None), bool)
    assert isinstance(validators.is_one_of(("a",))("b"), bool)
    assert isinstance(validators.is_between(0, 1)(0.5), bool)


def test_mergeconfigs_has_correct_inputs_and_outputs():
    result = merge_configs(get_default_config(), {"epochs": 3})
    assert isinstance(result, dict)
    assert result["epochs"] == 3


def test_model_and_scores_have_correct_outputs():
    model = create_alignment_model(4, seed=0)
    assert model.dim == 4
    assert set(model.parameters()) == {"src_adapter", "tgt_adapter", "src_chain", "tgt_chain"}

    score = csls_score(np.array([1.0, 0.0]), np.array([0.6, 0.8]), 0.25, 0.5)
    assert np.isclose(score, 0.45)
