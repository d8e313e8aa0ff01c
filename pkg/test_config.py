import logging

import pytest

from mollifem.config import DECADE_NOTE, SEED_ENV, StudyConfig, build_config, lambda_range, normalise_n_values, parse_config
from mollifem.errors import MissingFile, ParseError, UnknownFamily, UnknownKernel, ValidationError
from mollifem.mesh_fe import Family


@pytest.fixture(autouse=True)
def no_seed_env(monkeypatch):
    monkeypatch.delenv(SEED_ENV, raising=False)


def write(tmp_path, text):
    path = tmp_path / "study.toml"
    path.write_text(text)
    return path


def test_defaults():
    config = parse_config()
    assert config.family is Family.P1
    assert config.kernel is None
    assert config.lambda_grid == [0.25 * k for k in range(21)]
    assert config.n_values == [11, 101, 1001]
    assert config.draws == 1000
    assert config.seed == 42
    assert config.simpson_m == 100_000
    assert config.workers == 1
    assert config.notes == [DECADE_NOTE]


def test_p2_even_counts_move_up(caplog):
    with caplog.at_level(logging.WARNING, logger="mollifem.config"):
        config = parse_config(overrides={"family": "P2", "n_values": [10, 100, 1000]})
    assert config.n_values == [11, 101, 1001]
    assert len(config.notes) == 4
    assert config.notes[-1] == DECADE_NOTE
    assert "10 replaced by 11" in caplog.text
    assert DECADE_NOTE not in caplog.text


def test_decade_note_only_for_the_default_counts():
    assert parse_config(overrides={"n_values": [11, 21, 41]}).notes == []
    assert parse_config(overrides={"n_values": [11, 101, 1001]}).notes == [DECADE_NOTE]


def test_notes_survive_an_echo_round_trip():
    config = parse_config(overrides={"family": "P2", "n_values": [10, 100, 1000]})
    again = StudyConfig.model_validate(config.echo())
    assert again.notes == config.notes
    assert again.echo() == config.echo()


def test_p2_normalisation_cannot_break_ordering():
    with pytest.raises(ValidationError):
        parse_config(overrides={"family": "P2", "n_values": [10, 11]})


def test_normalise_leaves_p1_alone():
    assert normalise_n_values(Family.P1, [10, 100]) == ([10, 100], [])


def test_unknown_kernel():
    with pytest.raises(UnknownKernel) as info:
        parse_config(overrides={"kernel": "G"})
    assert info.value.exit_code == 3


def test_kernel_none_spelled_out():
    assert parse_config(overrides={"kernel": "none"}).kernel is None
    assert parse_config(overrides={"kernel": "H"}).kernel == "H"


@pytest.mark.parametrize(
    "overrides",
    [
        {"lambda_grid": []},
        {"lambda_grid": [1.0, 0.5]},
        {"lambda_grid": [-0.5, 1.0]},
        {"draws": 0},
        {"workers": 0},
        {"simpson_m": 1001},
        {"n_values": [11]},
        {"n_values": [101, 11]},
        {"n_values": [2, 11]},
        {"seed": -1},
        {"colour": "blue"},
    ],
)
def test_invalid_overrides(overrides):
    with pytest.raises(ValidationError):
        parse_config(overrides=overrides)


def test_toml_file(tmp_path):
    path = write(tmp_path, """
[mesh_fe]
family = "P2"

[kernel]
name = "K"

[quadrature]
simpson_m = 2000

[experiment]
draws = 50
seed = 7

[rates]
lambda_grid = {start = 0.0, stop = 1.0, step = 0.5}
n_values = [11, 21]
""")
    config = parse_config(path)
    assert config.family is Family.P2
    assert config.kernel == "K"
    assert config.simpson_m == 2000
    assert (config.draws, config.seed) == (50, 7)
    assert config.lambda_grid == [0.0, 0.5, 1.0]
    assert config.n_values == [11, 21]


def test_overrides_beat_the_file(tmp_path):
    path = write(tmp_path, "[experiment]\ndraws = 50\nseed = 7\n")
    config = parse_config(path, {"draws": 10, "seed": None})
    assert config.draws == 10
    assert config.seed == 7


def test_unknown_key_in_file(tmp_path):
    with pytest.raises(ValidationError):
        parse_config(write(tmp_path, "[experiment]\nsamples = 3\n"))
    with pytest.raises(ValidationError):
        parse_config(write(tmp_path, "[plotting]\ndpi = 3\n"))


def test_missing_file(tmp_path):
    with pytest.raises(MissingFile) as info:
        parse_config(tmp_path / "absent.toml")
    assert info.value.exit_code == 2


def test_parse_error_reports_the_line(tmp_path):
    with pytest.raises(ParseError) as info:
        parse_config(write(tmp_path, "[rates]\nn_values = [11, 101\ndraws = 3\n"))
    assert info.value.line is not None
    assert str(info.value).startswith(f"line {info.value.line}: ")


def test_seed_from_environment(monkeypatch, tmp_path):
    monkeypatch.setenv(SEED_ENV, "1234")
    assert parse_config().seed == 1234
    assert parse_config(overrides={"seed": 5}).seed == 5
    assert parse_config(write(tmp_path, "[experiment]\nseed = 9\n")).seed == 9


def test_bad_seed_in_environment(monkeypatch):
    monkeypatch.setenv(SEED_ENV, "abc")
    with pytest.raises(ValidationError):
        parse_config()


def test_echo_round_trips():
    config = parse_config(overrides={"family": "P2", "kernel": "H", "n_values": [10, 100]})
    echo = config.echo()
    assert StudyConfig.model_validate(echo).echo() == echo
    assert build_config(echo) == config


def test_lambda_range_is_inclusive():
    assert lambda_range(0.0, 5.0, 0.25)[-1] == 5.0
    assert len(lambda_range(0.0, 5.0, 0.25)) == 21
    with pytest.raises(ValidationError):
        lambda_range(0.0, 1.0, 0.0)


def test_unknown_family():
    with pytest.raises(UnknownFamily):
        parse_config(overrides={"family": "P3"})
