"""Hourly page polling: fetch, deduplicate, freeze, write.

The poller walks every tracked page once per run, asking the connector
for records newer than a per-page watermark (max posted_at already
stored, minus a 10-minute overlap to absorb connector clock skew — the
store's dedup makes the overlap harmless).  A record whose post_id is
already stored is skipped without touching the stored row: engagement
snapshots are frozen at first retrieval and never updated, by design.

Each connector call consumes one unit of the per-run request budget;
when the budget runs out, remaining pages are reported as errors rather
than silently skipped.  A connector failure on one page never aborts
the run.

The scheduler fires the poller at wall-clock boundaries (every
``interval`` seconds, on the hour by default).  If the process stalls
across several boundaries, exactly one catch-up poll runs, not a burst.
"""

from __future__ import annotations

import abc
import logging
import os
import time as time_module
from dataclasses import dataclass, field
from typing import Callable, Protocol

from .records import FeedRecord, RecordError, read_record_file
from .store import PostStore

log = logging.getLogger(__name__)

DEFAULT_RATE_BUDGET = 200
WATERMARK_OVERLAP_SECONDS = 600


class PageFeedConnector(abc.ABC):
    """Source of post records for tracked pages.

    Implementations declare ``max_requests_per_hour``; every
    ``fetch_posts`` call (including pagination continuations) counts as
    one request against that budget.
    """

    max_requests_per_hour: int = DEFAULT_RATE_BUDGET

    @abc.abstractmethod
    def fetch_posts(
        self, page_id: str, since: int, page_cursor: str | None = None
    ) -> tuple[list[FeedRecord], str | None]:
        """Records with posted_at >= since, plus an opaque continuation cursor.

        A None cursor in the result means the page is exhausted.
        """


class FixtureConnector(PageFeedConnector):
    """Connector reading per-page record files from a directory.

    Each tracked page is one ``<page_id>.jsonl`` file in the shared
    record serialization.  Results are returned oldest-first in pages of
    ``page_size`` records to exercise the same pagination path a live
    connector would.
    """

    def __init__(
        self,
        fixture_dir: str,
        page_size: int = 100,
        max_requests_per_hour: int = DEFAULT_RATE_BUDGET,
    ) -> None:
        self.fixture_dir = fixture_dir
        self.page_size = page_size
        self.max_requests_per_hour = max_requests_per_hour

    def fetch_posts(
        self, page_id: str, since: int, page_cursor: str | None = None
    ) -> tuple[list[FeedRecord], str | None]:
        path = os.path.join(self.fixture_dir, f"{page_id}.jsonl")
        if not os.path.exists(path):
            raise FileNotFoundError(f"no fixture file for page {page_id!r}")
        records = [r for r in read_record_file(path) if r.posted_at >= since]
        records.sort(key=lambda r: (r.posted_at, r.post_id))
        offset = int(page_cursor) if page_cursor is not None else 0
        chunk = records[offset : offset + self.page_size]
        next_offset = offset + self.page_size
        next_cursor = str(next_offset) if next_offset < len(records) else None
        return chunk, next_cursor


@dataclass
class PollReport:
    """Tallies for one poll run.  posts_new + posts_skipped_duplicate
    equals the number of records the connector returned during the run."""

    run_at: int
    pages_polled: int = 0
    posts_new: int = 0
    posts_skipped_duplicate: int = 0
    requests_used: int = 0
    errors: list[tuple[str, str]] = field(default_factory=list)


def watermark_for_page(
    store: PostStore, page_id: str, now: int, retention_days: int
) -> int:
    """Fetch-from timestamp for one page.

    Newest stored posted_at minus the overlap; on a page never seen
    before, the start of the retention window (first-run backfill, with
    the caveat that retrieved_at then reflects backfill time, not
    within-an-hour freshness).
    """
    latest = store.latest_posted_at(page_id)
    if latest is None:
        return now - retention_days * 86400
    return latest - WATERMARK_OVERLAP_SECONDS


def poll_once(
    connector: PageFeedConnector,
    pages: list[str],
    store: PostStore,
    now: int,
) -> PollReport:
    """Poll every tracked page once and write new posts to the store.

    Per-page connector failures are recorded in the report and do not
    abort the run; a store write failure propagates (the failed post is
    never partially written).
    """
    if not pages:
        raise ValueError("pages must be non-empty")
    report = PollReport(run_at=now)
    budget = connector.max_requests_per_hour

    for page_id in pages:
        if report.requests_used >= budget:
            report.errors.append((page_id, "rate budget exhausted"))
            continue
        try:
            _poll_page(connector, page_id, store, now, report, budget)
        except Exception as exc:  # noqa: BLE001 - page isolation is the contract
            report.errors.append((page_id, f"{type(exc).__name__}: {exc}"))
        report.pages_polled += 1
    return report


def _poll_page(
    connector: PageFeedConnector,
    page_id: str,
    store: PostStore,
    now: int,
    report: PollReport,
    budget: int,
) -> None:
    since = watermark_for_page(store, page_id, now, store.retention_days)
    cursor: str | None = None
    while True:
        records, cursor = connector.fetch_posts(page_id, since, cursor)
        report.requests_used += 1
        for record in records:
            try:
                post = record.to_post(retrieved_at=now)
            except (ValueError, RecordError) as exc:
                raise RecordError(f"bad record {record.post_id!r}: {exc}") from None
            if store.insert_post(post):
                report.posts_new += 1
            else:
                report.posts_skipped_duplicate += 1
        if cursor is None:
            return
        if report.requests_used >= budget:
            report.errors.append((page_id, "rate budget exhausted mid-pagination"))
            return


class Clock(Protocol):
    """Wall-clock time plus sleep; injectable for offline testing."""

    def now(self) -> float: ...

    def sleep(self, seconds: float) -> None: ...


class SystemClock:
    def now(self) -> float:
        return time_module.time()

    def sleep(self, seconds: float) -> None:
        time_module.sleep(seconds)


def run_scheduler(
    connector: PageFeedConnector,
    pages: list[str],
    store: PostStore,
    clock: Clock,
    interval: int = 3600,
    max_polls: int | None = None,
    on_report: Callable[[PollReport], None] | None = None,
) -> None:
    """Fire poll_once at each wall-clock boundary (hh:00:00 for the
    default interval); runs forever unless ``max_polls`` is given.

    Boundaries missed while stalled collapse into a single catch-up
    poll.  A failing poll is logged and never kills the loop.
    """
    if interval <= 0:
        raise ValueError(f"interval must be positive, got {interval}")
    fired = 0
    last_boundary = int(clock.now()) // interval * interval
    while max_polls is None or fired < max_polls:
        now = clock.now()
        due = int(now) // interval * interval
        if due > last_boundary:
            last_boundary = due
            fired += 1
            try:
                report = poll_once(connector, pages, store, now=int(now))
            except Exception:  # noqa: BLE001 - scheduler must outlive poll failures
                log.exception("poll at boundary %d failed", due)
            else:
                log.info(
                    "poll at %d: %d new, %d duplicate, %d errors",
                    due,
                    report.posts_new,
                    report.posts_skipped_duplicate,
                    len(report.errors),
                )
                if on_report is not None:
                    on_report(report)
            continue
        clock.sleep(max(0.0, due + interval - now))
