"""Pass/fail registry for the acceptance criteria; printed in the terminal summary."""

import time
from contextlib import contextmanager

RESULTS: dict[int, tuple[str, str, float]] = {}


@contextmanager
def criterion(n: int, title: str):
    info: dict = {}
    t = time.time()
    try:
        yield info
    except BaseException:
        RESULTS[n] = ("FAIL", f"{title} {_fmt(info)}", time.time() - t)
        print(f"criterion {n}: FAIL {title} {_fmt(info)}")
        raise
    RESULTS[n] = ("PASS", f"{title} {_fmt(info)}", time.time() - t)
    print(f"criterion {n}: PASS {title} {_fmt(info)}")


def _fmt(info: dict) -> str:
    return " ".join(f"{k}={v}" for k, v in info.items())
