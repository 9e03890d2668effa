import pytest

from ebt_rvnn.config.settings import Config, ModelConfig, TrainConfig
from ebt_rvnn.errors import ConfigError


def test_defaults():
    config = Config()
    assert config.model.variant == "ebt-grc"
    assert config.model.beam_size == 5
    assert config.model.beam_noise is True
    assert config.train.lr == 1e-3
    assert config.bench.length_list() == [50, 100, 200]


def test_load_file(tmp_path):
    path = tmp_path / "c.txt"
    path.write_text("seed = 7  # comment\n\nmodel.d = 32\nmodel.slice_scorer = off\n"
                    "train.eps = 1e-6\nbench.variants = gt-grc, ebt-grc\n", encoding="utf-8")
    config = Config(str(path))
    assert config.seed == 7
    assert config.model.d == 32
    assert config.model.slice_scorer is False
    assert config.train.eps == 1e-6
    assert config.bench.variant_list() == ["gt-grc", "ebt-grc"]


@pytest.mark.parametrize("text, fragment", [
    ("model.width = 3\n", "unknown key"),
    ("\nmodel.d\n", ":2:"),
    ("model.beam_size = many\n", "expected int"),
    ("model.slice_scorer = maybe\n", "boolean"),
    ("model.variant = lstm\n", "Unknown model variant"),
])
def test_load_errors(tmp_path, text, fragment):
    path = tmp_path / "c.txt"
    path.write_text(text, encoding="utf-8")
    with pytest.raises(ConfigError) as excinfo:
        Config(str(path))
    assert fragment in str(excinfo.value)


def test_save_and_reload(tmp_path):
    config = Config()
    config.update_config(model={"d": 16, "beam_noise": False}, seed=3)
    path = tmp_path / "saved.txt"
    config.save_config(str(path))
    assert Config(str(path)).to_dict() == config.to_dict()


def test_update_validation():
    config = Config()
    with pytest.raises(ConfigError):
        config.update_config(model={"depth": 3})
    with pytest.raises(ConfigError):
        config.update_config(model={"dropout": 1.5})
    with pytest.raises(ConfigError):
        config.update_config(colour="red")


def test_from_dict():
    original = Config()
    original.update_config(model={"variant": "ebt-gau", "head_size": 16}, train={"epochs": 2})
    rebuilt = Config.from_dict(original.to_dict())
    assert rebuilt.model == original.model
    assert rebuilt.train.epochs == 2
    with pytest.raises(ConfigError):
        Config.from_dict({"model": 3})


def test_model_config_validate():
    with pytest.raises(ConfigError):
        ModelConfig(dtype="float16").validate()
    with pytest.raises(ConfigError):
        ModelConfig(beam_size=0).validate()


@pytest.mark.parametrize("overrides", [
    {"batch_size": 0}, {"epochs": 0}, {"lr": 0.0}, {"lr": -1e-3}, {"patience": -1},
    {"beta1": 1.0}, {"eps": 0.0},
])
def test_train_config_validate(overrides):
    with pytest.raises(ConfigError):
        TrainConfig(**overrides).validate()


def test_train_config_accepts_disabled_patience():
    TrainConfig(patience=0).validate()


def test_bad_train_values_are_rejected_on_load_and_update(tmp_path):
    path = tmp_path / "c.txt"
    path.write_text("train.batch_size = 0\n", encoding="utf-8")
    with pytest.raises(ConfigError):
        Config(str(path))
    with pytest.raises(ConfigError):
        Config().update_config(train={"lr": -0.1})
