import io
import json
import logging
import sys

import pytest

from hyplat.logging_config import JSONFormatter, setup_logging


@pytest.fixture
def restore_root_logger():
    root = logging.getLogger()
    handlers, level = list(root.handlers), root.level
    yield root
    root.handlers = handlers
    root.setLevel(level)


def test_json_formatter():
    formatter = JSONFormatter()
    record = logging.LogRecord(
        name="hyplat.voronoi",
        level=logging.INFO,
        pathname="voronoi.py",
        lineno=10,
        msg="class %d discovered",
        args=(3,),
        exc_info=None
    )

    data = json.loads(formatter.format(record))

    assert data["message"] == "class 3 discovered"
    assert data["level"] == "INFO"
    assert data["logger"] == "hyplat.voronoi"
    assert "timestamp" in data
    assert "module" in data
    assert data["lineno"] == 10
    assert "exception" not in data


def test_json_formatter_exception():
    formatter = JSONFormatter()
    try:
        raise ValueError("Gram matrix is singular")
    except ValueError:
        exc_info = sys.exc_info()

    record = logging.LogRecord(
        name="hyplat.cli",
        level=logging.ERROR,
        pathname="cli.py",
        lineno=20,
        msg="pipeline failed",
        args=(),
        exc_info=exc_info
    )

    data = json.loads(JSONFormatter().format(record))

    assert data["message"] == "pipeline failed"
    assert "ValueError: Gram matrix is singular" in data["exception"]


def test_setup_logging_plain(restore_root_logger):
    stream = io.StringIO()
    setup_logging(level="DEBUG", fmt="plain", stream=stream)
    logging.getLogger("hyplat.cone").debug("anchor [1, 0, 0]")
    assert stream.getvalue() == "DEBUG hyplat.cone: anchor [1, 0, 0]\n"


def test_setup_logging_json_and_level(restore_root_logger):
    stream = io.StringIO()
    setup_logging(level="WARNING", fmt="json", stream=stream)
    log = logging.getLogger("hyplat.watson")
    log.info("hidden")
    log.warning("shown")
    lines = stream.getvalue().splitlines()
    assert len(lines) == 1
    assert json.loads(lines[0])["message"] == "shown"


def test_setup_logging_replaces_handlers(restore_root_logger):
    setup_logging(stream=io.StringIO())
    setup_logging(stream=io.StringIO())
    assert len(restore_root_logger.handlers) == 1
