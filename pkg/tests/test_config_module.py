import pytest

from spline_system_verifier.config import (
    KNOWN_FAMILIES,
    ConfigError,
    experiment_config_from_mapping,
    load_config,
    load_experiment_config,
    parse_experiment_text,
    resolve_path,
)


def test_load_default_config():
    cfg = load_config()
    assert isinstance(cfg, dict)
    assert "paths" in cfg
    assert cfg["experiment_defaults"]["k"] == 2


def test_load_config_missing(tmp_path):
    missing = tmp_path / "missing.json"
    with pytest.raises(FileNotFoundError):
        load_config(str(missing))


def test_load_config_invalid_json(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json", encoding="utf-8")
    with pytest.raises(ValueError):
        load_config(bad)
    listed = tmp_path / "list.json"
    listed.write_text("[1, 2]", encoding="utf-8")
    with pytest.raises(ValueError):
        load_config(listed)


def test_quick_config_parses():
    cfg = load_experiment_config(resolve_path("config_rules/quick.cfg"))
    assert cfg.k == 2
    assert cfg.family == "dyadic"
    assert cfg.n == 24
    assert cfg.p_list == (1.5, 3.0)
    assert cfg.output_dir == "data/experiments/quick"


def test_parse_experiment_text_comments_and_errors():
    values = parse_experiment_text("# header\nk = 3  # order\n\nfamily=clustered\n")
    assert values == {"k": "3", "family": "clustered"}
    with pytest.raises(ConfigError, match="Line 2"):
        parse_experiment_text("k=2\nno separator\n")
    with pytest.raises(ConfigError):
        parse_experiment_text("=5\n")


def test_defaults_are_overridden_by_values():
    cfg = experiment_config_from_mapping({"n": "40", "p_list": "1.5 2"}, {"k": 3, "n": 20})
    assert (cfg.k, cfg.n, cfg.p_list) == (3, 40, (1.5, 2.0))
    assert cfg.N_k_override is None
    assert experiment_config_from_mapping({"N_k_override": "none"}).N_k_override is None


@pytest.mark.parametrize(
    "values",
    [
        {"k": 7, "n": 20},
        {"k": 2, "n": 5},
        {"p_list": "1"},
        {"p_list": "inf"},
        {"family": "custom-file"},
        {"family": "fibonacci"},
        {"trials": 0},
        {"technical_p": 1.0},
    ],
)
def test_invalid_experiment_configs(values):
    with pytest.raises(ConfigError):
        experiment_config_from_mapping(values)


def test_unknown_key_and_bad_value():
    with pytest.raises(ConfigError, match="Unknown"):
        experiment_config_from_mapping({"order": 2})
    with pytest.raises(ConfigError):
        experiment_config_from_mapping({"k": "two"})


def test_missing_experiment_file(tmp_path):
    with pytest.raises(ConfigError):
        load_experiment_config(tmp_path / "nope.cfg")


def test_all_families_accepted():
    for family in KNOWN_FAMILIES:
        extra = {"sequence_file": "knots.txt"} if family == "custom-file" else {}
        assert experiment_config_from_mapping({"family": family, **extra}).family == family


def test_projection_grid_defaults_to_256_points_per_interval():
    assert experiment_config_from_mapping({}).projection_points == 256
    assert load_config()["experiment_defaults"]["projection_points"] == 256
    cfg = experiment_config_from_mapping({}, load_config()["experiment_defaults"])
    assert cfg.projection_points == 256
