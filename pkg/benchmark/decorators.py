import functools
import time


def timed(f):
    """return (seconds, result) of one call"""

    @functools.wraps(f)
    def decorator(*args, **kwargs):
        t = time.perf_counter()
        result = f(*args, **kwargs)
        return time.perf_counter() - t, result

    return decorator
