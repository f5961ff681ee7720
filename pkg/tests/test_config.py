import importlib

import pytest

from hyplat import config


@pytest.fixture
def reload_config(monkeypatch):
    yield lambda: importlib.reload(config)
    monkeypatch.undo()
    importlib.reload(config)


def test_defaults(monkeypatch, reload_config):
    for name in ("HYPLAT_LOG_LEVEL", "HYPLAT_ORBIT_BUDGET", "HYPLAT_BATCH_WORKERS", "HYPLAT_LOG_FORMAT"):
        monkeypatch.delenv(name, raising=False)
    cfg = reload_config()
    assert cfg.LOG_LEVEL == "INFO"
    assert cfg.LOG_FORMAT == "json"
    assert cfg.ORBIT_BUDGET == 200000
    assert cfg.BATCH_WORKERS == 1


def test_environment_overrides(monkeypatch, reload_config):
    monkeypatch.setenv("HYPLAT_LOG_LEVEL", "debug")
    monkeypatch.setenv("HYPLAT_ORBIT_BUDGET", "50")
    monkeypatch.setenv("HYPLAT_LOG_FORMAT", "PLAIN")
    cfg = reload_config()
    assert cfg.LOG_LEVEL == "DEBUG"
    assert cfg.ORBIT_BUDGET == 50
    assert cfg.LOG_FORMAT == "plain"
