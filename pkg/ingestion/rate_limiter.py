"""Per-host politeness gate for archive requests."""

import asyncio
import time
from collections import defaultdict, deque

# Recent start times kept per host
START_HISTORY = 256


class HostRateLimiter:
    """Minimum-interval gate keyed by request host.

    For any host, consecutive request start times are at least
    ``min_interval`` seconds apart, regardless of how many tasks share the gate.
    """

    def __init__(self, min_interval: float, clock=time.monotonic, history: int = START_HISTORY):
        """Initialize rate limiter."""
        self.min_interval = min_interval
        self.clock = clock
        self.last_start: dict[str, float] = {}
        self.starts: dict[str, deque[float]] = defaultdict(lambda: deque(maxlen=history))
        self._locks: dict[str, asyncio.Lock] = defaultdict(asyncio.Lock)

    async def acquire(self, host: str) -> float:
        """Wait until a request to ``host`` may start and record its start time."""
        async with self._locks[host]:
            wait = self.get_retry_after(host)
            if wait > 0:
                await asyncio.sleep(wait)
            now = self.clock()
            # sleep() may wake marginally early
            while self.get_retry_after(host, now) > 0:
                await asyncio.sleep(self.get_retry_after(host, now))
                now = self.clock()
            self.last_start[host] = now
            self.starts[host].append(now)
            return now

    def get_retry_after(self, host: str, now: float | None = None) -> float:
        """Get seconds until the next request to ``host`` is allowed."""
        last = self.last_start.get(host)
        if last is None:
            return 0.0
        now = self.clock() if now is None else now
        return max(0.0, last + self.min_interval - now)
