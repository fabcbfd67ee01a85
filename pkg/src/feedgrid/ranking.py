"""Windowed top-K selection, the daily cutoff window, and the shared sort order.

Every ordering in the system (Explorer sorting, the Daily Top-10, the
Visual Grid) goes through :func:`sort_key` so that client-visible order
is identical everywhere.  The order is total: primary by the requested
key, then posted_at descending, then post_id ascending.  Age-adjusted
metric comparisons use exact rationals, so equal ratios compare equal
regardless of magnitude (10/10 == 5/5).

Daily windows are 24 hours of absolute time, half-open on posted_at,
ending at the most recent local-time cutoff (default 17:00 in
America/New_York).  On daylight-saving transition days the cutoff still
lands at the configured local wall-clock time; the window stays exactly
24h of absolute time.
"""

from __future__ import annotations

import heapq
import threading
from dataclasses import dataclass
from datetime import datetime, time, timedelta
from fractions import Fraction
from typing import Callable, Iterable, TypeVar
from zoneinfo import ZoneInfo

from .domain import MetricKey, Post, metric_value

SORT_NEWEST = "newest"
SORT_OLDEST = "oldest"

#: All 20 sort tokens accepted on the wire and in QuerySpec.
SORT_TOKENS: tuple[str, ...] = (SORT_NEWEST, SORT_OLDEST) + tuple(
    k.token for k in MetricKey.all_keys()
)

WINDOW_SECONDS = 24 * 3600

DEFAULT_TIMEZONE = "America/New_York"
DEFAULT_CUTOFF = time(hour=17, minute=0)

SortKeyTuple = tuple


def sort_key(sort: str, descending: bool = True) -> Callable[[Post], SortKeyTuple]:
    """Key function realizing the shared total order, ascending-by-key.

    ``sort`` is one of :data:`SORT_TOKENS`.  ``descending`` applies to
    metric sorts only; ``newest``/``oldest`` carry their own direction.
    Sorting a list by the returned key puts the best-ranked post first.
    """
    if sort == SORT_NEWEST:
        return lambda p: (-p.posted_at, p.post_id)
    if sort == SORT_OLDEST:
        return lambda p: (p.posted_at, p.post_id)
    key = MetricKey.parse(sort)
    if descending:
        return lambda p: (-Fraction(metric_value(p, key)), -p.posted_at, p.post_id)
    return lambda p: (Fraction(metric_value(p, key)), -p.posted_at, p.post_id)


def compare(a: Post, b: Post, sort: str, descending: bool = True) -> int:
    """-1 if a ranks before b, 1 if after, 0 only for fully identical keys."""
    key = sort_key(sort, descending)
    ka, kb = key(a), key(b)
    if ka < kb:
        return -1
    if ka > kb:
        return 1
    return 0


@dataclass(frozen=True)
class DailyWindow:
    """Half-open 24h interval [cutoff - 24h, cutoff) over posted_at."""

    cutoff_time: int

    @property
    def start(self) -> int:
        return self.cutoff_time - WINDOW_SECONDS

    def contains(self, posted_at: int) -> bool:
        return self.start <= posted_at < self.cutoff_time


@dataclass(frozen=True)
class RankEntry:
    post_id: str
    value: int | Fraction
    post: Post


@dataclass(frozen=True)
class RankedView:
    """An ordered, windowed top-K selection."""

    window: DailyWindow
    metric: MetricKey
    k: int
    entries: tuple[RankEntry, ...]


def top_k(
    posts: Iterable[Post], window: DailyWindow, k: int, metric: MetricKey
) -> RankedView:
    """The k highest posts in the window under the shared order.

    Posts outside the window are ignored regardless of what the caller
    passes in.  Returns fewer than k entries when the window holds fewer
    posts.
    """
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    key = sort_key(metric.token, descending=True)
    in_window = (p for p in posts if window.contains(p.posted_at))
    best = heapq.nsmallest(k, in_window, key=key)
    entries = tuple(
        RankEntry(post_id=p.post_id, value=metric_value(p, metric), post=p)
        for p in best
    )
    return RankedView(window=window, metric=metric, k=k, entries=entries)


def current_daily_window(
    now: int,
    tz: str = DEFAULT_TIMEZONE,
    cutoff_local_time: time = DEFAULT_CUTOFF,
) -> DailyWindow:
    """Window ending at the latest configured-local-time cutoff <= now.

    A ``now`` falling exactly on a cutoff instant starts the new window:
    the returned window ends at that instant.
    """
    zone = ZoneInfo(tz)
    local_now = datetime.fromtimestamp(now, tz=zone)
    candidate = datetime.combine(local_now.date(), cutoff_local_time, tzinfo=zone)
    if candidate.timestamp() > now:
        previous_day = local_now.date() - timedelta(days=1)
        candidate = datetime.combine(previous_day, cutoff_local_time, tzinfo=zone)
    return DailyWindow(cutoff_time=int(candidate.timestamp()))


T = TypeVar("T")


class SingleFlightCache:
    """Keyed cache where at most one thread computes a missing value.

    Concurrent readers arriving during a recompute get the most recent
    previously cached value instead of blocking, matching the contract
    that daily views refresh without ever stalling requests.  Only the
    very first computation (no previous value) blocks waiters.
    """

    def __init__(self) -> None:
        self._state_lock = threading.Lock()
        self._flight_lock = threading.Lock()
        self._key: object = None
        self._value: object = None
        self._has_value = False

    def get(self, key: object, compute: Callable[[], T]) -> T:
        with self._state_lock:
            if self._has_value and self._key == key:
                return self._value  # type: ignore[return-value]
            stale = self._value if self._has_value else None
            has_stale = self._has_value

        if self._flight_lock.acquire(blocking=False):
            try:
                with self._state_lock:
                    if self._has_value and self._key == key:
                        return self._value  # type: ignore[return-value]
                value = compute()
                with self._state_lock:
                    self._key = key
                    self._value = value
                    self._has_value = True
                return value
            finally:
                self._flight_lock.release()

        if has_stale:
            return stale  # type: ignore[return-value]
        # First-ever computation in progress: wait for it.
        with self._flight_lock:
            pass
        with self._state_lock:
            if self._has_value:
                return self._value  # type: ignore[return-value]
        # Computing thread failed; retry ourselves.
        return self.get(key, compute)
