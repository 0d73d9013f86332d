from pathlib import Path

import pytest

from augnorm.core.config import (
    AugmentConfig,
    Config,
    FrameConfig,
    create_default_config,
    load_config,
    load_config_or_default,
    save_config,
)
from augnorm.core.errors import ConfigError


def test_load_config_or_default_missing_returns_default(tmp_path: Path) -> None:
    cfg = load_config_or_default(tmp_path / "does_not_exist.toml")
    assert isinstance(cfg, Config)
    assert cfg.loss.c == 0.3


def test_create_default_config_toml_and_load(tmp_path: Path) -> None:
    path = tmp_path / "augnorm.toml"
    create_default_config(path)
    cfg = load_config(path)
    assert cfg.frame.fft_size == 512
    assert cfg.vad.threshold_db == -40.0
    with pytest.raises(ConfigError):
        create_default_config(path)


def test_create_default_config_yaml_and_load(tmp_path: Path) -> None:
    path = tmp_path / "augnorm.yaml"
    create_default_config(path)
    assert load_config(path).augment.snr_std_db == 10.0


def test_repo_config_file_loads() -> None:
    cfg = load_config(Path(__file__).resolve().parent.parent / "augnorm.toml")
    assert cfg.model_dump() == Config().model_dump()


def test_save_config_keeps_comments(tmp_path: Path) -> None:
    path = tmp_path / "augnorm.toml"
    path.write_text("# my settings\n[loss]\n# compression\nc = 0.3\n", encoding="utf-8")
    cfg = load_config(path)
    cfg.runtime.seed = 17
    save_config(cfg, path)
    text = path.read_text(encoding="utf-8")
    assert "# compression" in text
    assert load_config(path).runtime.seed == 17


def test_unsupported_extension_raises(tmp_path: Path) -> None:
    path = tmp_path / "config.ini"
    path.write_text("[section]\nkey=value\n", encoding="utf-8")
    with pytest.raises(ConfigError):
        load_config(path)


def test_invalid_values_raise_config_error(tmp_path: Path) -> None:
    path = tmp_path / "bad.toml"
    path.write_text("[loss]\nc = 2.0\n", encoding="utf-8")
    with pytest.raises(ConfigError):
        load_config(path)
    path.write_text("[frame]\nhop = 300\n", encoding="utf-8")
    with pytest.raises(ConfigError):
        load_config(path)
    path.write_text("[unknown]\nx = 1\n", encoding="utf-8")
    with pytest.raises(ConfigError):
        load_config(path)


def test_vad_and_metrics_follow_root_frame(tmp_path: Path) -> None:
    path = tmp_path / "augnorm.toml"
    path.write_text("[frame]\nsample_rate_hz = 8000\nfft_size = 256\nwindow_len = 256\nhop = 128\n")
    cfg = load_config(path)
    assert cfg.vad.frame == cfg.frame
    assert cfg.metrics.frame.sample_rate_hz == 8000


def test_augment_presets() -> None:
    none = AugmentConfig.preset("none")
    assert (none.snr_mode, none.spectral, none.level) == ("discrete", False, False)
    full = AugmentConfig.preset("snr_spec_level", snr_std_db=5.0)
    assert full.level and full.spectral and full.snr_std_db == 5.0
    with pytest.raises(ConfigError):
        AugmentConfig.preset("bogus")  # type: ignore[arg-type]


def test_with_preset_keeps_distributions() -> None:
    base = AugmentConfig(snr_mean_db=0.0, level_std_db=4.0, snr_mode="discrete", level=False)
    snr = base.with_preset("snr")
    assert (snr.snr_mode, snr.spectral, snr.level) == ("gaussian", False, False)
    assert (snr.snr_mean_db, snr.level_std_db) == (0.0, 4.0)
    assert base.with_preset("snr_spec_level").level


def test_frame_geometry_validation() -> None:
    with pytest.raises(ValueError):
        FrameConfig(window_len=1024, fft_size=512)
    window = FrameConfig().window()
    assert window.shape == (512,)
    assert not window.flags.writeable
