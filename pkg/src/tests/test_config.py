"""
Tests for configuration loading and settings resolution.
"""

import pytest

from schur_realization.config import JobConfig, SamplingConfig, load_config_file, resolve_settings
from schur_realization.exceptions import ConfigError


class TestLoadConfigFile:
    """Tests for load_config_file."""

    def test_load_valid(self, temp_dir):
        """Test loading a valid configuration file."""
        path = temp_dir / "config.yaml"
        path.write_text("tolerances:\n  eq_tol: 1.0e-8\nsampling:\n  sample_count: 20\n")
        data = load_config_file(path)
        assert data["tolerances"]["eq_tol"] == 1e-8
        assert data["sampling"]["sample_count"] == 20

    def test_empty_file(self, temp_dir):
        """Test that an empty file gives an empty mapping."""
        path = temp_dir / "empty.yaml"
        path.write_text("")
        assert load_config_file(path) == {}

    def test_missing_file(self, temp_dir):
        """Test that a missing file raises ConfigError."""
        with pytest.raises(ConfigError, match="not found"):
            load_config_file(temp_dir / "missing.yaml")

    def test_unknown_key(self, temp_dir):
        """Test that unknown keys are refused."""
        path = temp_dir / "config.yaml"
        path.write_text("sampling:\n  samples: 20\n")
        with pytest.raises(ConfigError, match="unknown keys"):
            load_config_file(path)

    def test_unknown_section(self, temp_dir):
        """Test that unknown sections are refused."""
        path = temp_dir / "config.yaml"
        path.write_text("network:\n  port: 80\n")
        with pytest.raises(ConfigError, match="unknown section"):
            load_config_file(path)

    def test_malformed_yaml(self, temp_dir):
        """Test that malformed YAML raises ConfigError."""
        path = temp_dir / "config.yaml"
        path.write_text("sampling: [unclosed\n")
        with pytest.raises(ConfigError):
            load_config_file(path)


class TestResolveSettings:
    """Tests for resolve_settings."""

    def test_defaults(self):
        """Test the built-in defaults."""
        tol, sampling, output = resolve_settings()
        assert tol.eq_tol == 1e-9
        assert sampling == SamplingConfig()
        assert output == {"format": "json", "log_level": "WARNING"}

    def test_precedence(self):
        """Test that overrides beat file values which beat defaults."""
        file_data = {"sampling": {"sample_count": 20, "rng_seed": 7}, "output": {"format": "text"}}
        _, sampling, output = resolve_settings(file_data, {"sample_count": 5, "rng_seed": None})
        assert sampling.sample_count == 5
        assert sampling.rng_seed == 7
        assert output["format"] == "text"

    def test_degree_cap_null(self):
        """Test that an empty degree cap keeps the automatic cap."""
        _, sampling, _ = resolve_settings({"sampling": {"degree_cap": None}})
        assert sampling.degree_cap is None
        assert sampling.cap_for(2, 3) == 12

    def test_bad_number(self):
        """Test that non-numeric values are refused."""
        with pytest.raises(ConfigError):
            resolve_settings({"tolerances": {"eq_tol": "small"}})


class TestValidation:
    """Tests for validation in the settings classes."""

    @pytest.mark.parametrize(
        "kwargs",
        [{"sample_count": 0}, {"sample_radius": 1.0}, {"sample_radius": 0.0}, {"threads": 0}, {"degree_cap": 0}],
    )
    def test_sampling_rejects(self, kwargs):
        """Test that invalid sampling settings are refused."""
        with pytest.raises(ConfigError):
            SamplingConfig(**kwargs)

    def test_generator_streams(self):
        """Test that streams of one seed are independent and reproducible."""
        cfg = SamplingConfig(rng_seed=1)
        assert cfg.generator(0).random() == cfg.generator(0).random()
        assert cfg.generator(0).random() != cfg.generator(1).random()

    def test_job_config(self):
        """Test format and log level validation."""
        assert JobConfig("classify", log_level="debug").log_level == "DEBUG"
        with pytest.raises(ConfigError):
            JobConfig("classify", output_format="xml")
        with pytest.raises(ConfigError):
            JobConfig("classify", log_level="chatty")
