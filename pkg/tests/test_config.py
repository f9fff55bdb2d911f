import pytest

from slp.config import SCHEMA, describe_defaults, load_config, parse_config
from slp.densities import BetaDensity, SingularityDensitySpec
from slp.errors import ConfigError


def test_empty_simulate_section_gives_defaults():
    cfg = parse_config("[simulate]\n")
    sim = cfg["simulate"]
    assert (sim["sigma"], sim["c_bandwidth"], sim["grid_N"]) == (0.3, 0.7, 3000)
    assert sim["replications"] is None and sim["seed"] == 0
    assert sim["rules"] == ("SSR1", "SSR2", "SSR3", "SSR4")


def test_values_parsed():
    cfg = parse_config(
        """
        [simulate]
        a = 2.6   # knife-edge side
        n_list = 3000, 5000
        rules = SSR2, SSR4
        [rate]
        consts = 1, 2, 3, 4
        [estimate]
        T1 = auto
        order_l = 2
        """.replace("        ", "")
    )
    assert cfg["simulate"]["a"] == 2.6
    assert cfg["simulate"]["n_list"] == (3000, 5000)
    assert cfg["simulate"]["rules"] == ("SSR2", "SSR4")
    assert cfg["rate"]["consts"] == (1.0, 2.0, 3.0, 4.0)
    assert cfg["estimate"]["T1"] is None and cfg["estimate"]["order_l"] == 2


def test_negative_sigma_names_key():
    with pytest.raises(ConfigError, match="sigma"):
        parse_config("[simulate]\nsigma = -1\n")


def test_unknown_key_named():
    with pytest.raises(ConfigError, match="bandwith"):
        parse_config("[simulate]\nbandwith = 0.7\n")


def test_unknown_section():
    with pytest.raises(ConfigError, match="estimator"):
        parse_config("[estimator]\nbeta = 1\n")


@pytest.mark.parametrize(
    "text,line",
    [("[simulate]\nsigma = 0.3\nsigma = 0.4\n", "line 3"), ("a = 1\n", "line 1"), ("[rate]\n\n[rate]\n", "line 3")],
)
def test_syntax_errors_report_line(text, line):
    with pytest.raises(ConfigError, match=line):
        parse_config(text)


@pytest.mark.parametrize(
    "text,key",
    [
        ("[simulate]\nn_list = 3000, 1.5\n", "n_list"),
        ("[simulate]\nrules = SSR9\n", "rules"),
        ("[rate]\nconsts = 1, 1\n", "consts"),
        ("[estimate]\ngate = maybe\n", "gate"),
        ("[spread]\nn = lots\n", "n"),
    ],
)
def test_bad_values_name_key(text, key):
    with pytest.raises(ConfigError, match=key):
        parse_config(text)


def test_density_sections():
    cfg = parse_config("[target]\nkind = singular\npieces = 0:0.5:1:1.5:2, 0.5:1:1:2:1\n")
    assert isinstance(cfg.density("target"), SingularityDensitySpec)
    assert cfg.density("source") == BetaDensity(4.0, 1.0)
    with pytest.raises(ConfigError, match="pieces"):
        parse_config("[target]\nkind = singular\n").density("target")
    with pytest.raises(ConfigError, match="pieces"):
        parse_config("[target]\nkind = singular\npieces = 0:1:1\n")


def test_load_missing_file(tmp_path):
    with pytest.raises(ConfigError, match="cannot read"):
        load_config(str(tmp_path / "nope.cfg"))
    assert load_config(None)["rate"]["a"] == 4.0


def test_every_default_documented():
    text = describe_defaults()
    for section, keys in SCHEMA.items():
        assert f"[{section}]" in text
        for key in keys:
            assert f"    {key} = " in text
