"""
Settings precedence: overrides > environment > config file > defaults.
"""

import pytest

from matchbench.config import get_settings, get_settings_manager
from matchbench.config.settings import SettingsManager
from matchbench.core.errors import ConfigError
from matchbench.models import TaskScope
from matchbench.services.experiment_service import SuiteConfig

from conftest import write_json


def test_defaults():
    settings = get_settings()
    assert settings.experiment.runs == 5
    assert settings.experiment.votes == 3
    assert settings.llm.model == "gpt-3.5-turbo-0125"
    assert settings.prompt.persona_as_system is False
    assert get_settings_manager().api_key() is None


def test_environment(monkeypatch):
    monkeypatch.setenv("MATCHBENCH_LLM__MODEL", "local-model")
    monkeypatch.setenv("MATCHBENCH_API_KEY", "sk-env")
    SettingsManager.reset()
    assert get_settings().llm.model == "local-model"
    assert get_settings_manager().api_key() == "sk-env"
    assert "sk-env" not in repr(get_settings())


def test_config_file_then_environment(monkeypatch, tmp_path):
    config = write_json(tmp_path / "matchbench.json", {"experiment": {"runs": 2, "votes": 5}})
    monkeypatch.setenv("MATCHBENCH_CONFIG", str(config))
    SettingsManager.reset()
    assert get_settings().experiment.runs == 2
    assert get_settings().experiment.votes == 5

    monkeypatch.setenv("MATCHBENCH_EXPERIMENT__RUNS", "3")
    SettingsManager.reset()
    assert get_settings().experiment.runs == 3
    assert get_settings().experiment.votes == 5


def test_overrides_beat_environment(monkeypatch):
    monkeypatch.setenv("MATCHBENCH_LLM__MODEL", "env-model")
    monkeypatch.setenv("MATCHBENCH_API_KEY", "sk-env")
    SettingsManager.reset()
    manager = get_settings_manager()
    manager.update(llm={"model": "flag-model", "backend": None}, experiment={"runs": 1})

    assert manager.settings.llm.model == "flag-model"
    assert manager.settings.llm.backend == "live"
    assert manager.settings.experiment.runs == 1
    assert manager.api_key() == "sk-env"
    assert manager.get("llm.model") == "flag-model"
    assert manager.get("llm.nothing", "fallback") == "fallback"


def test_even_votes_are_rejected():
    with pytest.raises(ConfigError):
        get_settings_manager().update(experiment={"votes": 2})


def test_invalid_environment(monkeypatch):
    monkeypatch.setenv("MATCHBENCH_EXPERIMENT__RUNS", "zero")
    SettingsManager.reset()
    with pytest.raises(ConfigError):
        get_settings()


def test_suite_config_from_settings():
    manager = get_settings_manager()
    manager.update(
        llm={"backend": "mock", "max_requests": 7},
        experiment={"scopes": ["1-to-1", "N-to-M"]},
    )
    cfg = SuiteConfig.from_settings(manager.settings, api_key="sk-x")
    assert cfg.scopes == [TaskScope.ONE_TO_ONE, TaskScope.N_TO_M]
    assert cfg.max_requests == 7
    assert cfg.backend == "mock"
    assert cfg.api_key == "sk-x"


def test_suite_config_rejects_unknown_scope():
    manager = get_settings_manager()
    manager.update(experiment={"scopes": ["2-to-2"]})
    with pytest.raises(ConfigError):
        SuiteConfig.from_settings(manager.settings)
