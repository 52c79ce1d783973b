"""Unique identifiers and wall-clock timestamps."""
import contextlib
import random
import threading
import time
import uuid

_local = threading.local()


def new_uid() -> str:
    """Random UUIDv4 text, or a reproducible one inside :func:`seeded_uids`."""
    rng = getattr(_local, "rng", None)
    if rng is None:
        return str(uuid.uuid4())
    return str(uuid.UUID(int=rng.getrandbits(128), version=4))


@contextlib.contextmanager
def seeded_uids(seed: int):
    previous = getattr(_local, "rng", None)
    _local.rng = random.Random(seed)
    try:
        yield
    finally:
        _local.rng = previous


def now_us() -> int:
    return time.time_ns() // 1000
