import datetime
import json
import logging
import sys

from hyplat import config


class JSONFormatter(logging.Formatter):
    def format(self, record):
        log_record = {
            "timestamp": datetime.datetime.fromtimestamp(record.created).isoformat(),
            "level": record.levelname,
            "logger": record.name,
            "message": record.getMessage(),
            "module": record.module,
            "funcName": record.funcName,
            "lineno": record.lineno,
        }
        if record.exc_info:
            log_record["exception"] = self.formatException(record.exc_info)
        return json.dumps(log_record)


def setup_logging(level=None, fmt=None, stream=None):
    logger = logging.getLogger()
    logger.setLevel(level or config.LOG_LEVEL)

    # Drop handlers from earlier calls so repeated CLI invocations in one process don't duplicate lines
    for handler in list(logger.handlers):
        logger.removeHandler(handler)

    # stdout carries the CLI summary, logs go to stderr
    handler = logging.StreamHandler(stream or sys.stderr)
    if (fmt or config.LOG_FORMAT) == "plain":
        handler.setFormatter(logging.Formatter("%(levelname)s %(name)s: %(message)s"))
    else:
        handler.setFormatter(JSONFormatter())
    logger.addHandler(handler)
    return logger
