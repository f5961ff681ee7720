import logging
import time
from contextlib import contextmanager
from functools import wraps

logger = logging.getLogger("hyplat.profiling")


def log_profile(msg):
    logger.debug(f"[PROFILER] {msg}")


def profile_time(func_or_label=None):
    """
    Decorator to measure execution time of a function.
    Can be used as @profile_time or @profile_time("Label").
    """
    def decorator(func):
        @wraps(func)
        def wrapper(*args, **kwargs):
            label = func_or_label if isinstance(func_or_label, str) else func.__name__
            start_time = time.perf_counter()
            try:
                return func(*args, **kwargs)
            finally:
                duration = (time.perf_counter() - start_time) * 1000
                log_profile(f"Action '{label}' took {duration:.2f} ms")
        return wrapper

    if callable(func_or_label):
        return decorator(func_or_label)
    return decorator


@contextmanager
def profile_block(name, timings=None):
    """Measure a code block; the duration in ms is stored under `name` when a dict is given."""
    start_time = time.perf_counter()
    try:
        yield
    finally:
        duration = (time.perf_counter() - start_time) * 1000
        if timings is not None:
            timings[name] = round(timings.get(name, 0.0) + duration, 3)
        log_profile(f"Block '{name}' took {duration:.2f} ms")
