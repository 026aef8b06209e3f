import pytest

from idpfem.config import ConfigError, RunConfig, eval_fraction, parse_config


class TestParsing:
    def test_empty_text_gives_defaults(self):
        cfg = parse_config("")
        assert cfg.limiter == "mcl.cs"
        assert cfg.rk == "ssp2"
        assert cfg.cfl == 0.5
        assert cfg.benchmark == "constant"

    def test_minimal_config(self):
        cfg = parse_config("benchmark = advected_gaussian\nh = 1/32\n"
                           "t_end = 0.25\n")
        assert cfg.benchmark == "advected_gaussian"
        assert cfg.h == pytest.approx(1 / 32)
        assert cfg.t_end == 0.25

    def test_comments_and_blanks(self):
        cfg = parse_config("# header\n\ncfl = 0.9  # inline comment\n")
        assert cfg.cfl == 0.9

    def test_limiter_selection(self):
        assert parse_config("limiter = fct.cs\n").limiter == "fct.cs"

    def test_unknown_key(self):
        with pytest.raises(ConfigError, match="line 2.*unknown key"):
            parse_config("cfl = 0.5\nbananas = 3\n")

    def test_invalid_enum_lists_valid_values(self):
        with pytest.raises(ConfigError, match="mcl.cs"):
            parse_config("limiter = banana\n")

    def test_duplicate_key(self):
        with pytest.raises(ConfigError, match="duplicate"):
            parse_config("cfl = 0.5\ncfl = 0.6\n")

    def test_malformed_line(self):
        with pytest.raises(ConfigError, match="line 1"):
            parse_config("this is not a key value pair\n")

    def test_bad_number(self):
        with pytest.raises(ConfigError, match="bad number"):
            parse_config("cfl = fast\n")

    def test_bad_integer(self):
        with pytest.raises(ConfigError, match="bad integer"):
            parse_config("audit_every = 1.5\n")

    def test_empty_value(self):
        with pytest.raises(ConfigError, match="empty value"):
            parse_config("cfl =\n")


class TestValidation:
    def test_cfl_range(self):
        with pytest.raises(ConfigError, match="cfl"):
            parse_config("cfl = 1.2\n")

    def test_gamma_range(self):
        with pytest.raises(ConfigError, match="gamma"):
            parse_config("gamma = 0.9\n")

    def test_h_positive(self):
        with pytest.raises(ConfigError, match="h"):
            parse_config("h = -0.1\n")

    def test_audit_every_nonnegative(self):
        with pytest.raises(ConfigError, match="audit_every"):
            parse_config("audit_every = -1\n")


class TestFractions:
    def test_plain_float(self):
        assert eval_fraction("0.25") == 0.25

    def test_fraction(self):
        assert eval_fraction("1/64") == pytest.approx(1 / 64)


def test_effective_text_roundtrips():
    cfg = RunConfig(benchmark="burgers_riemann", h=1 / 32, limiter="fct.scale",
                    cfl=0.8, t_end=0.5, rk="ssp3")
    back = parse_config(cfg.effective_text())
    assert back == cfg
