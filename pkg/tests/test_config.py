"""TOML run-config parsing: schema enforcement and CLI override precedence."""

import pytest

from torustwist import config
from torustwist.errors import ConfigError

FAMILY = '[family]\nname = "standard"\nk = 1.0\n'


@pytest.fixture
def write(tmp_path):
    def _write(text, name="run.toml"):
        p = tmp_path / name
        p.write_text(text)
        return p
    return _write


def test_defaults_fill_in(write):
    cfg = config.load_config(write(FAMILY + "[rotation]\nseeds = [[0.1, 0.2]]\n"),
                             "rotation")
    assert cfg.command == "rotation"
    assert cfg.family_name == "standard"
    assert cfg.family_params == {"k": 1.0}
    assert (cfg.out, cfg.workers, cfg.rng_seed) == ("runs", 1, None)
    assert cfg.options == {"horizon": 10_000, "window": 1_000,
                           "seeds": [(0.1, 0.2)]}


def test_echo_is_json_ready(write):
    cfg = config.load_config(write(FAMILY + "[rotation]\nseeds = [[0.1, 0.2]]\n"),
                             "rotation")
    echoed = cfg.echo()
    assert echoed["family"] == {"name": "standard", "k": 1.0}
    assert echoed["run"] == {"out": "runs", "workers": 1, "rng_seed": None}
    import json
    json.dumps(echoed)  # must not choke on any value


def test_missing_command_section_ok_when_all_defaulted(write):
    cfg = config.load_config(write(FAMILY), "map-check")
    assert cfg.options == {"n_grid": 64, "n_quad": 2048}


def test_unknown_table_rejected(write):
    with pytest.raises(ConfigError, match="unknown config tables"):
        config.load_config(write(FAMILY + "[mystery]\nx = 1\n"), "rotation")


def test_unknown_key_rejected(write):
    with pytest.raises(ConfigError, match="unknown keys"):
        config.load_config(
            write(FAMILY + "[rotation]\nseeds=[[0.1,0.2]]\nbogus = 3\n"),
            "rotation")


def test_all_sections_validated_not_just_the_active_one(write):
    # a bad [kcr] table poisons a rotation run too: whole file valid or not
    text = FAMILY + "[rotation]\nseeds=[[0.1,0.2]]\n[kcr]\nnonsense = 1\n"
    with pytest.raises(ConfigError, match=r"\[kcr\]"):
        config.load_config(write(text), "rotation")


def test_booleans_are_not_numbers(write):
    with pytest.raises(ConfigError, match="expected a number, got True"):
        config.load_config(write(FAMILY.replace("k = 1.0", "k = true")),
                           "rotation")
    with pytest.raises(ConfigError, match="expected an integer"):
        config.load_config(
            write(FAMILY + "[rotation]\nseeds=[[0.1,0.2]]\nhorizon = true\n"),
            "rotation")


def test_family_table_required(write):
    with pytest.raises(ConfigError, match=r"\[family\]"):
        config.load_config(write("[rotation]\nseeds=[[0.1,0.2]]\n"), "rotation")
    with pytest.raises(ConfigError, match="missing required key 'name'"):
        config.load_config(write("[family]\nk = 1.0\n"), "rotation")


def test_required_keys_enforced(write):
    with pytest.raises(ConfigError, match="missing required key 'p'"):
        config.load_config(write(FAMILY + "[levelset]\nq = 1\n"), "levelset")


def test_positive_tolerances_enforced(write):
    text = FAMILY + "[levelset]\np = 0\nq = 1\nroot_tol = 0.0\n"
    with pytest.raises(ConfigError, match="must be > 0"):
        config.load_config(write(text), "levelset")
    with pytest.raises(ConfigError, match="must be >= 1"):
        config.load_config(
            write(FAMILY + "[run]\nworkers = 0\n[rotation]\nseeds=[[0.1,0.2]]\n"),
            "rotation")


def test_rotation_seed_spellings_are_exclusive(write):
    with pytest.raises(ConfigError, match="need seeds"):
        config.load_config(write(FAMILY + "[rotation]\n"), "rotation")
    both = FAMILY + ("[rotation]\nseeds=[[0.1,0.2]]\n"
                     "phi_values=[0.1]\ni_values=[0.2]\n")
    with pytest.raises(ConfigError, match="not both"):
        config.load_config(write(both), "rotation")


def test_rotation_grid_expands_cartesian(write):
    text = FAMILY + "[rotation]\nphi_values=[0.0, 0.5]\ni_values=[0.1, 0.2]\n"
    cfg = config.load_config(write(text), "rotation")
    assert cfg.options["seeds"] == [(0.0, 0.1), (0.0, 0.2),
                                    (0.5, 0.1), (0.5, 0.2)]


def test_random_commands_require_a_seed(write):
    with pytest.raises(ConfigError, match="rng_seed"):
        config.load_config(write(FAMILY + "[ric]\n"), "ric")
    # supplying it on the command line satisfies the requirement
    cfg = config.load_config(write(FAMILY + "[ric]\n"), "ric", rng_seed=7)
    assert cfg.rng_seed == 7


def test_cli_overrides_beat_file_values(write):
    text = FAMILY + '[run]\nout = "elsewhere"\nworkers = 2\nrng_seed = 5\n[ric]\n'
    p = write(text)
    cfg = config.load_config(p, "ric", out="cli_out", workers=8, rng_seed=9)
    assert (cfg.out, cfg.workers, cfg.rng_seed) == ("cli_out", 8, 9)
    kept = config.load_config(p, "ric")
    assert (kept.out, kept.workers, kept.rng_seed) == ("elsewhere", 2, 5)
