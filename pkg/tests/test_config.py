"""
Tests for environment-driven settings
"""

import logging

import config


def test_worker_count_defaults_to_cpu_count(monkeypatch):
    monkeypatch.delenv("GRAPH_UNION_LAB_THREADS", raising=False)
    monkeypatch.setattr(config.os, "cpu_count", lambda: 6)
    assert config.get_worker_count() == 6


def test_worker_count_from_environment(monkeypatch):
    monkeypatch.setenv("GRAPH_UNION_LAB_THREADS", "3")
    assert config.get_worker_count() == 3


def test_invalid_worker_count_falls_back_to_one(monkeypatch, caplog):
    for raw in ("zero", "0", "-2"):
        monkeypatch.setenv("GRAPH_UNION_LAB_THREADS", raw)
        with caplog.at_level(logging.WARNING, logger="CONFIG"):
            assert config.get_worker_count() == 1
    assert "GRAPH_UNION_LAB_THREADS" in caplog.text


def test_validate_config(monkeypatch):
    monkeypatch.delenv("GRAPH_UNION_LAB_THREADS", raising=False)
    ok, errors = config.validate_config()
    assert ok, errors

    monkeypatch.setenv("GRAPH_UNION_LAB_THREADS", "four")
    ok, errors = config.validate_config()
    assert not ok
    assert errors == ["GRAPH_UNION_LAB_THREADS must be a positive integer"]


def test_validate_config_flags_log_level(monkeypatch):
    monkeypatch.delenv("GRAPH_UNION_LAB_THREADS", raising=False)
    monkeypatch.setitem(config.LOGGING_CONFIG, "level", "CHATTY")
    ok, errors = config.validate_config()
    assert not ok
    assert "CHATTY" in errors[0]


def test_get_setting_strips_blank_values(monkeypatch):
    monkeypatch.setenv("GRAPH_UNION_LAB_SAMPLE_KEY", "   ")
    assert config.get_setting("GRAPH_UNION_LAB_SAMPLE_KEY", "fallback") == "fallback"
    monkeypatch.setenv("GRAPH_UNION_LAB_SAMPLE_KEY", " value ")
    assert config.get_setting("GRAPH_UNION_LAB_SAMPLE_KEY") == "value"


def test_config_summary_keys():
    summary = config.get_config_summary()
    assert set(summary) == {
        "workers", "default_master_seed", "progress", "enumeration_budget", "brute_force_max_n", "log_level",
    }
    assert summary["brute_force_max_n"] == 16
