"""Config validation, key=value parsing, and serialization round-trips."""

import pytest

from men.config import MenConfig, config_from_mapping, config_to_lines, parse_kv_lines
from men.errors import DataError


class TestValidation:
    def test_defaults_valid(self):
        cfg = MenConfig()
        assert cfg.beta > 0 and cfg.K >= 1

    @pytest.mark.parametrize(
        "kwargs",
        [
            dict(alpha=-1.0),
            dict(beta=0.0),
            dict(kappa=-0.1),
            dict(lambda2=-0.5),
            dict(k1=-1),
            dict(d=0),
            dict(K=0),
            dict(pca_retain=-2),
            dict(eig_floor=-1e-3),
        ],
    )
    def test_rejects_bad_values(self, kwargs):
        with pytest.raises(DataError):
            MenConfig(**kwargs)

    def test_with_overrides(self):
        cfg = MenConfig().with_overrides(d=5, K=7)
        assert (cfg.d, cfg.K) == (5, 7)
        assert MenConfig().d == 2  # original untouched


class TestKvParsing:
    def test_comments_and_blanks(self):
        mapping = parse_kv_lines(["# header", "", "alpha=2.0  # trailing", "K=3"])
        assert mapping == {"alpha": "2.0", "K": "3"}

    def test_missing_equals(self):
        with pytest.raises(DataError, match="line 2"):
            parse_kv_lines(["alpha=1.0", "beta 2.0"])

    def test_unknown_key_named(self):
        with pytest.raises(DataError, match="mystery"):
            config_from_mapping({"mystery": "1"})

    def test_bad_value_named(self):
        with pytest.raises(DataError, match="alpha"):
            config_from_mapping({"alpha": "fast"})

    def test_bool_and_optional_forms(self):
        cfg = config_from_mapping(
            {
                "double_shrinkage_correction": "true",
                "center_class_means": "0",
                "pca_retain": "auto",
                "lambda1": "none",
            }
        )
        assert cfg.double_shrinkage_correction is True
        assert cfg.center_class_means is False
        assert cfg.pca_retain is None
        assert cfg.lambda1 is None
        assert config_from_mapping({"pca_retain": "0"}).pca_retain == 0


class TestRoundTrip:
    def test_lines_reparse_exactly(self):
        cfg = MenConfig(
            alpha=0.1234567890123456,
            beta=17.25,
            lambda2=1e-9,
            lambda1=2.5,
            pca_retain=12,
            double_shrinkage_correction=True,
        )
        mapping = parse_kv_lines(config_to_lines(cfg))
        assert config_from_mapping(mapping) == cfg

    def test_every_key_has_default(self):
        # every serialized key parses back on its own, so the documented
        # defaults cover the whole schema
        for line in config_to_lines(MenConfig()):
            key, value = line.split("=", 1)
            config_from_mapping({key: value})
