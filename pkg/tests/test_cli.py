import pytest

from main import DEFAULT_CONFIG_FILE, parse_args


def test_parse_args_log_level():
    args = parse_args(["--log-level", "DEBUG", "run"])
    assert args.log_level == "DEBUG"
    assert args.command == "run"


def test_parse_args_defaults():
    args = parse_args(["run"])
    assert args.log_level is None
    assert args.app_config == DEFAULT_CONFIG_FILE
    assert args.config is None
    assert args.format is None


def test_parse_run_flags():
    args = parse_args([
        "run", "--k", "3", "--family", "clustered", "--n", "64", "--p", "1.5,3",
        "--out", "out", "--format", "csv", "--format", "xml",
        "--config", "a.cfg", "--config", "b.cfg",
    ])
    assert (args.k, args.family, args.n, args.p, args.out) == (3, "clustered", 64, "1.5,3", "out")
    assert args.format == ["csv", "xml"]
    assert args.config == ["a.cfg", "b.cfg"]


def test_parse_verify_quick():
    assert parse_args(["verify", "--quick"]).quick
    assert not parse_args(["verify"]).quick


def test_parse_report_requires_meta():
    with pytest.raises(SystemExit):
        parse_args(["report"])
    args = parse_args(["report", "--meta", "m.json", "--format", "xml"])
    assert (args.meta, args.format, args.out) == ("m.json", "xml", None)


def test_subcommand_required():
    with pytest.raises(SystemExit):
        parse_args([])
