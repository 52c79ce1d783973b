"""Clocks and timers driving a model: virtual (deterministic) or real time."""
from __future__ import annotations

import heapq
import itertools
import threading
import time
from typing import Callable

from ..model.uid import now_us


class TimerHandle:
    __slots__ = ("when", "fn", "cancelled")

    def __init__(self, when: int, fn: Callable[[], None]):
        self.when = when
        self.fn = fn
        self.cancelled = False

    def cancel(self) -> None:
        self.cancelled = True


class Scheduler:
    """Interface: integer microsecond clock plus one-shot timers."""

    def now(self) -> int:
        raise NotImplementedError

    def call_at(self, when: int, fn: Callable[[], None]) -> TimerHandle:
        raise NotImplementedError

    def call_later(self, delay: int, fn: Callable[[], None]) -> TimerHandle:
        return self.call_at(self.now() + int(delay), fn)

    def start(self) -> None:
        pass

    def stop(self) -> None:
        pass


class VirtualScheduler(Scheduler):
    """Discrete-event clock; time only moves inside :meth:`run_until`.

    Timers due at the same instant fire in the order they were scheduled,
    which makes runs reproducible.
    """

    def __init__(self, start: int = 0):
        self._now = int(start)
        self._heap: list[tuple[int, int, TimerHandle]] = []
        self._seq = itertools.count()
        self._lock = threading.RLock()

    def now(self) -> int:
        return self._now

    def call_at(self, when: int, fn) -> TimerHandle:
        handle = TimerHandle(max(int(when), self._now), fn)
        with self._lock:
            heapq.heappush(self._heap, (handle.when, next(self._seq), handle))
        return handle

    def pending(self) -> int:
        return sum(1 for _, _, h in self._heap if not h.cancelled)

    def step(self) -> bool:
        with self._lock:
            while self._heap and self._heap[0][2].cancelled:
                heapq.heappop(self._heap)
            if not self._heap:
                return False
            when, _, handle = heapq.heappop(self._heap)
        self._now = max(self._now, when)
        handle.fn()
        return True

    def run_until(self, when: int) -> None:
        """Fire every timer due at or before ``when``, then set the clock to ``when``."""
        while True:
            with self._lock:
                while self._heap and self._heap[0][2].cancelled:
                    heapq.heappop(self._heap)
                if not self._heap or self._heap[0][0] > when:
                    break
            self.step()
        self._now = max(self._now, int(when))

    def run(self, limit: int | None = None) -> None:
        """Fire timers until none are left (or the clock passes ``limit``)."""
        while True:
            with self._lock:
                while self._heap and self._heap[0][2].cancelled:
                    heapq.heappop(self._heap)
                if not self._heap or (limit is not None and self._heap[0][0] > limit):
                    return
            self.step()


class RealtimeScheduler(Scheduler):
    """Wall-clock timers fired from a single background thread."""

    def __init__(self, clock: Callable[[], int] = now_us):
        self._clock = clock
        self._heap: list[tuple[int, int, TimerHandle]] = []
        self._seq = itertools.count()
        self._cond = threading.Condition()
        self._thread: threading.Thread | None = None
        self._running = False

    def now(self) -> int:
        return self._clock()

    def call_at(self, when: int, fn) -> TimerHandle:
        handle = TimerHandle(int(when), fn)
        with self._cond:
            heapq.heappush(self._heap, (handle.when, next(self._seq), handle))
            self._cond.notify()
        if self._thread is None:
            self.start()
        return handle

    def start(self) -> None:
        with self._cond:
            if self._running:
                return
            self._running = True
        self._thread = threading.Thread(target=self._loop, name="hybridpos-timers", daemon=True)
        self._thread.start()

    def stop(self) -> None:
        with self._cond:
            self._running = False
            self._cond.notify()
        if self._thread is not None and self._thread is not threading.current_thread():
            self._thread.join(timeout=5)
        self._thread = None

    def _loop(self) -> None:
        while True:
            with self._cond:
                if not self._running:
                    return
                if not self._heap:
                    self._cond.wait(0.1)
                    continue
                when, _, handle = self._heap[0]
                delay = (when - self.now()) / 1e6
                if delay > 0:
                    self._cond.wait(min(delay, 0.1))
                    continue
                heapq.heappop(self._heap)
            if not handle.cancelled:
                try:
                    handle.fn()
                except Exception:  # timers must not kill the loop
                    import logging
                    logging.getLogger(__name__).exception("timer callback failed")


def sleep_us(us: int) -> None:
    time.sleep(us / 1e6)
