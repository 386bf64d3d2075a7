"""Unit tests for structured logging."""

import io
import json
import logging

import pytest

from specsense.utils.logging import bind_run_context, get_logger, log_elapsed, setup_logging


@pytest.fixture
def stream():
    """Console stream captured in memory."""
    buffer = io.StringIO()
    yield buffer
    setup_logging(log_level="INFO")


def records(buffer):
    return [json.loads(line) for line in buffer.getvalue().splitlines() if line.strip()]


class TestSetupLogging:
    """Test logger configuration."""

    def test_json_lines(self, stream):
        """Test records are JSON with level, name and extra fields."""
        setup_logging(log_level="INFO", stream=stream)
        get_logger("simulator.engine").info("ROC computed", extra={"K": 4, "trials": 100})
        (record,) = records(stream)
        assert record["message"] == "ROC computed"
        assert record["levelname"] == "INFO"
        assert record["name"] == "specsense.simulator.engine"
        assert record["K"] == 4
        assert record["timestamp"].endswith("+00:00")

    def test_level_filtering(self, stream):
        """Test records below the level are dropped."""
        setup_logging(log_level="warning", stream=stream)
        get_logger("config").info("hidden")
        get_logger("config").warning("shown")
        assert [r["message"] for r in records(stream)] == ["shown"]

    def test_reconfigure_replaces_handlers(self, stream):
        """Test repeated setup does not duplicate output."""
        setup_logging(stream=stream)
        logger = setup_logging(stream=stream)
        assert len(logger.handlers) == 1
        get_logger("main").info("once")
        assert len(records(stream)) == 1

    def test_log_file(self, stream, tmp_path):
        """Test the file handler receives the same records."""
        path = tmp_path / "logs" / "run.log"
        logger = setup_logging(log_file=str(path), stream=stream)
        get_logger("main").info("to file")
        for handler in logger.handlers:
            handler.flush()
        assert json.loads(path.read_text().strip())["message"] == "to file"

    def test_no_propagation(self):
        """Test the package logger stays off the root logger."""
        assert setup_logging().propagate is False


class TestGetLogger:
    """Test logger naming."""

    def test_module_name(self):
        """Test __name__ style names are not doubled."""
        assert get_logger("specsense.beta.approx").name == "specsense.beta.approx"
        assert get_logger("beta.approx").name == "specsense.beta.approx"


class TestRunContext:
    """Test run context fields."""

    def test_fields_on_every_record(self, stream):
        """Test bound fields appear on records from child loggers."""
        logger = setup_logging(stream=stream)
        bind_run_context(logger, command="roc", version="0.3.0")
        get_logger("simulator.engine").info("one")
        get_logger("cli.commands").info("two", extra={"command": "explicit"})
        first, second = records(stream)
        assert first["command"] == "roc"
        assert first["version"] == "0.3.0"
        assert second["command"] == "explicit"

    def test_rebinding_replaces_context(self, stream):
        """Test a second bind replaces the first."""
        logger = setup_logging(stream=stream)
        bind_run_context(logger, command="moments")
        bind_run_context(logger, command="study")
        get_logger("main").info("run")
        assert records(stream)[0]["command"] == "study"


class TestLogElapsed:
    """Test block timing."""

    def test_elapsed_logged_at_debug(self, stream):
        """Test the block's fields and elapsed time are logged."""
        setup_logging(log_level="DEBUG", stream=stream)
        with log_elapsed(get_logger("simulator.engine"), "Trials simulated", trials=10) as extra:
            extra["chunks"] = 2
        (record,) = records(stream)
        assert record["levelname"] == "DEBUG"
        assert record["trials"] == 10
        assert record["chunks"] == 2
        assert record["elapsed_s"] >= 0.0

    def test_logged_on_error(self, stream):
        """Test timing is logged when the block raises."""
        setup_logging(log_level="DEBUG", stream=stream)
        with pytest.raises(RuntimeError):
            with log_elapsed(get_logger("main"), "failed block"):
                raise RuntimeError("boom")
        assert records(stream)[0]["message"] == "failed block"

    def test_silent_above_debug(self, stream):
        """Test nothing is written at INFO."""
        setup_logging(log_level="INFO", stream=stream)
        with log_elapsed(get_logger("main"), "quiet"):
            pass
        assert records(stream) == []
        assert logging.getLogger("specsense").level == logging.INFO
