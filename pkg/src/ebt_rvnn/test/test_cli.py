import pytest

from ebt_rvnn.cli import cli_main
from ebt_rvnn.data.dataset_io import FileDatasetStore

TINY_CONFIG = """
# small enough for a unit test
model.variant = ebt-grc
model.d = 8
model.d_cell = 16
model.d_s = 4
model.beam_size = 2
model.head_size = 4
model.dtype = float64
data.train_size = 8
data.val_size = 4
data.test_size = 3
data.max_length = 20
data.length_split_min = 20
data.length_split_max = 30
data.length_split_depth = 5
data.args_split_max_length = 30
train.epochs = 1
train.batch_size = 4
bench.d = 8
bench.d_cell = 16
bench.d_s = 4
bench.beam_size = 2
bench.dtype = float64
"""


@pytest.fixture
def tiny_config(workdir):
    path = workdir / "tiny.txt"
    path.write_text(TINY_CONFIG, encoding="utf-8")
    return str(path)


def test_no_arguments_prints_usage(workdir, capsys):
    assert cli_main([]) == 1
    assert "usage" in capsys.readouterr().err


@pytest.mark.parametrize("argv", [["frobnicate"], ["--frobnicate", "gen"], ["oracle", "--n", "four"]])
def test_usage_errors(workdir, argv):
    assert cli_main(argv) == 1


def test_oracle(workdir, capsys):
    assert cli_main(["--seed", "1", "--no-color", "oracle", "--n", "4", "--k", "6"]) == 0
    assert "max root deviation" in capsys.readouterr().out


def test_oracle_guard(workdir):
    assert cli_main(["--no-color", "oracle", "--n", "7", "--k", "2"]) == 2


def test_gradcheck(workdir, capsys):
    assert cli_main(["--no-color", "gradcheck"]) == 0
    assert "grc_compose" in capsys.readouterr().out


def test_missing_config_file(workdir):
    assert cli_main(["--config", "nope.txt", "gen"]) == 1


def test_bad_config_value(workdir):
    (workdir / "bad.txt").write_text("model.d = wide\n", encoding="utf-8")
    assert cli_main(["--config", "bad.txt", "gen"]) == 1


def test_gen_train_eval(tiny_config, workdir):
    assert cli_main(["--config", tiny_config, "--no-color", "--out", "data", "gen"]) == 0
    store = FileDatasetStore(workdir / "data")
    assert store.list_splits() == ["train", "val", "test_length", "test_args"]
    assert len(store.load_split("train")) == 8
    assert all(20 <= len(s) <= 30 for s in store.load_split("test_length"))

    checkpoint = workdir / "model.ckpt"
    assert cli_main(["--config", tiny_config, "--no-color", "--out", str(checkpoint),
                     "train", "--data", "data"]) == 0
    assert checkpoint.exists()
    assert (workdir / "logs" / "ebt_rvnn.log").exists()

    assert cli_main(["--no-color", "eval", "--checkpoint", str(checkpoint), "--data", "data"]) == 0
    assert cli_main(["--no-color", "eval", "--checkpoint", "missing.ckpt", "--data", "data"]) == 2


def test_bench_writes_reports(tiny_config, workdir):
    argv = ["--config", tiny_config, "--no-color", "--out", "results",
            "bench", "--lengths", "6", "--variants", "egt-grc,ebt-grc", "--repetitions", "1"]
    assert cli_main(argv) == 0
    csv_lines = (workdir / "results" / "bench.csv").read_text(encoding="utf-8").splitlines()
    assert len(csv_lines) == 3
    assert (workdir / "results" / "bench.txt").exists()


def test_bench_unknown_variant(tiny_config, workdir):
    assert cli_main(["--config", tiny_config, "bench", "--variants", "ebt-lstm"]) == 1


def test_config_log_level_applies_without_the_flag(workdir):
    (workdir / "debug.txt").write_text("log_level = DEBUG\n", encoding="utf-8")
    assert cli_main(["--config", "debug.txt", "--no-color", "oracle", "--n", "3", "--k", "2"]) == 0
    log = (workdir / "logs" / "ebt_rvnn.log").read_text(encoding="utf-8")
    assert "Logging initialized at level DEBUG" in log


def test_log_level_flag_wins_over_the_config(workdir):
    (workdir / "debug.txt").write_text("log_level = DEBUG\n", encoding="utf-8")
    argv = ["--config", "debug.txt", "--log-level", "WARNING", "--no-color", "oracle", "--n", "3", "--k", "2"]
    assert cli_main(argv) == 0
    log = (workdir / "logs" / "ebt_rvnn.log").read_text(encoding="utf-8")
    assert "level DEBUG" not in log


def test_bad_config_log_level(workdir):
    (workdir / "loud.txt").write_text("log_level = LOUD\n", encoding="utf-8")
    assert cli_main(["--config", "loud.txt", "gen"]) == 1
