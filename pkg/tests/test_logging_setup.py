import logging

import pytest

from config.settings import get_settings
from core.logging_setup import LogType, cleanup_logs, setup_logging


@pytest.fixture
def restore_root_logger():
    root = logging.getLogger()
    handlers, level = root.handlers[:], root.level
    yield
    for handler in root.handlers:
        if handler not in handlers:
            handler.close()
    root.handlers[:] = handlers
    root.setLevel(level)


def test_cleanup_keeps_the_newest_logs(tmp_path):
    names = [f"2024010{i}000000_debug.log" for i in range(1, 9)]
    for name in names:
        (tmp_path / name).write_text("", encoding="utf-8")
    cleanup_logs(names, str(tmp_path), LogType.DEBUG)
    assert sorted(p.name for p in tmp_path.iterdir()) == names[-LogType.DEBUG.max_count:]


def test_cleanup_tolerates_missing_files(tmp_path, caplog):
    names = [f"2024010{i}000000_debug.log" for i in range(1, 8)]
    with caplog.at_level(logging.WARNING):
        cleanup_logs(names, str(tmp_path), LogType.DEBUG)
    assert "Error removing log" in caplog.text


def test_console_only_by_default_in_tests(restore_root_logger, tmp_path):
    setup_logging()
    root = logging.getLogger()
    assert len(root.handlers) == 1
    assert not (tmp_path / "logs").exists()


def test_file_handlers_per_log_type(monkeypatch, restore_root_logger, tmp_path):
    monkeypatch.setenv("CHANNEL_UC_LOG_TO_FILE", "true")
    monkeypatch.setenv("CHANNEL_UC_LOG_LEVEL", "warning")
    get_settings.cache_clear()

    setup_logging(str(tmp_path / "runs"))
    root = logging.getLogger()
    assert root.level == logging.DEBUG
    assert root.handlers[0].level == logging.WARNING
    levels = sorted(h.level for h in root.handlers[1:])
    assert levels == [logging.DEBUG, logging.INFO]
    for log_type in (LogType.APPLICATION, LogType.DEBUG):
        files = list((tmp_path / "runs" / log_type.directory_name).glob("*.log"))
        assert len(files) == 1
