from lexalign import get_default_config
from lexalign.lib.default_config import WORKERS_ENV_VAR, default_workers


def test_default_config_has_documented_values():
    default_config = get_default_config()

    assert default_config["k_hard"] == 128
    assert default_config["k_rand"] == 128
    assert default_config["activation"] == "tanh"
    assert default_config["iterations"] == 5
    assert default_config["epochs"] == 150
    assert default_config["patience"] == 10
    assert default_config["csls_k"] == 10
    assert default_config["augment_pool"] == 15000
    assert default_config["batch_size"] == 512
    assert default_config["self_learning"] is True
    assert default_config["validation_fraction"] == 0.1
    assert default_config["hard_pool"] is None
    assert default_config["max_vocab"] == 200000
    assert default_config["numeric_width"] == "double"
    assert default_config["projection"] == "householder"
    assert default_config["orthogonality_weight"] == 1.0
    assert default_config.get("nonExistent") is None


def test_default_config_is_a_fresh_copy():
    first = get_default_config()
    first["epochs"] = 1

    assert get_default_config()["epochs"] == 150


def test_workers_default_comes_from_the_environment(monkeypatch):
    monkeypatch.setenv(WORKERS_ENV_VAR, "6")
    assert default_workers() == 6
    assert get_default_config()["workers"] == 6

    monkeypatch.setenv(WORKERS_ENV_VAR, "zero")
    assert default_workers() == 1

    monkeypatch.delenv(WORKERS_ENV_VAR)
    assert default_workers() == 1
