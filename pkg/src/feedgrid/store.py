"""Durable post storage with time/publisher/keyword filtering.

SQLite-backed: one row per post, primary-keyed on post_id so duplicate
ingestion is a structural no-op (the freeze rule).  Filtering happens in
SQL over indexed columns; ordering happens in Python through the shared
sort order in :mod:`feedgrid.ranking` so that query results, the Daily
Top-10, and the Visual Grid can never diverge.  The corpus is
retention-bounded (default 45 days), so sorting a full match set in
memory is cheap.

Keyword matching is case-insensitive substring over the message text:
both sides are Unicode-casefolded, so "ELECTION" and "election" select
identical rows.  A casefolded copy of the message is stored alongside
the original to keep the scan in SQL.

Concurrency: one writer (the ingestion loop), any number of readers.
All access is serialized through one connection guarded by a lock, so
readers always observe a consistent snapshot.
"""

from __future__ import annotations

import sqlite3
import threading
import time
from dataclasses import dataclass
from typing import IO, Iterable

from . import ranking
from .domain import EngagementCounts, Post
from .records import FeedRecord, write_records

MIN_RETENTION_DAYS = 31
DEFAULT_RETENTION_DAYS = 45

MAX_QUERY_LIMIT = 100

_SCHEMA = """
CREATE TABLE IF NOT EXISTS posts (
    post_id        TEXT PRIMARY KEY,
    page_id        TEXT NOT NULL,
    posted_at      INTEGER NOT NULL,
    retrieved_at   INTEGER NOT NULL,
    message        TEXT NOT NULL,
    message_folded TEXT NOT NULL,
    link_url       TEXT,
    image_url      TEXT,
    permalink      TEXT NOT NULL,
    like_count     INTEGER NOT NULL,
    comment_count  INTEGER NOT NULL,
    share_count    INTEGER NOT NULL,
    love_count     INTEGER NOT NULL,
    haha_count     INTEGER NOT NULL,
    wow_count      INTEGER NOT NULL,
    sad_count      INTEGER NOT NULL,
    angry_count    INTEGER NOT NULL
);
CREATE INDEX IF NOT EXISTS idx_posts_posted_at ON posts (posted_at);
CREATE INDEX IF NOT EXISTS idx_posts_page ON posts (page_id, posted_at);
"""

_COLUMNS = (
    "post_id, page_id, posted_at, retrieved_at, message, link_url, image_url, "
    "permalink, like_count, comment_count, share_count, love_count, haha_count, "
    "wow_count, sad_count, angry_count"
)


class QueryValidationError(ValueError):
    """A QuerySpec field failed validation; carries the offending field."""

    def __init__(self, field_name: str, reason: str) -> None:
        self.field = field_name
        self.reason = reason
        super().__init__(f"{field_name}: {reason}")


@dataclass(frozen=True)
class QuerySpec:
    """A filter/sort/pagination request against the post store.

    ``since``/``until`` bound posted_at as a half-open interval
    [since, until).  ``sort`` is one of the 20 tokens in
    :data:`feedgrid.ranking.SORT_TOKENS`; ``descending`` applies to
    metric sorts only (newest/oldest carry their own direction).
    """

    since: int
    until: int
    keyword: str | None = None
    page_ids: frozenset[str] | None = None
    sort: str = ranking.SORT_NEWEST
    descending: bool = True
    offset: int = 0
    limit: int = 50


def validate_query(spec: QuerySpec, now: int, retention_days: int) -> None:
    """Raise QueryValidationError naming the first invalid field."""
    if not isinstance(spec.limit, int) or spec.limit < 1 or spec.limit > MAX_QUERY_LIMIT:
        raise QueryValidationError(
            "limit", f"limit must be between 1 and {MAX_QUERY_LIMIT}"
        )
    if not isinstance(spec.offset, int) or spec.offset < 0:
        raise QueryValidationError("offset", "offset must be >= 0")
    if spec.sort not in ranking.SORT_TOKENS:
        raise QueryValidationError("sort", f"unknown sort key {spec.sort!r}")
    if spec.since > spec.until:
        raise QueryValidationError("since", "since must not be later than until")
    horizon = now - retention_days * 86400
    if spec.since < horizon:
        raise QueryValidationError(
            "since", f"since is beyond the {retention_days}-day retention window"
        )


class PostStore:
    """SQLite-backed post store.  Pass ``:memory:`` for an ephemeral store."""

    def __init__(
        self, path: str = ":memory:", retention_days: int = DEFAULT_RETENTION_DAYS
    ) -> None:
        if retention_days < MIN_RETENTION_DAYS:
            raise ValueError(
                f"retention_days must be >= {MIN_RETENTION_DAYS}, got {retention_days}"
            )
        self.retention_days = retention_days
        self._lock = threading.RLock()
        self._conn = sqlite3.connect(path, check_same_thread=False)
        self._conn.executescript(_SCHEMA)
        self._conn.commit()

    # -- writes ---------------------------------------------------------

    def insert_post(self, post: Post) -> bool:
        """Insert a post; returns False (and changes nothing) on duplicate post_id."""
        row = (
            post.post_id,
            post.page_id,
            post.posted_at,
            post.retrieved_at,
            post.message,
            post.message.casefold(),
            post.link_url,
            post.image_url,
            post.permalink,
            post.engagement.like,
            post.engagement.comment,
            post.engagement.share,
            post.engagement.love,
            post.engagement.haha,
            post.engagement.wow,
            post.engagement.sad,
            post.engagement.angry,
        )
        with self._lock, self._conn:
            cursor = self._conn.execute(
                "INSERT OR IGNORE INTO posts VALUES "
                "(?,?,?,?,?,?,?,?,?,?,?,?,?,?,?,?,?)",
                row,
            )
            return cursor.rowcount == 1

    def prune(self, retention_days: int, now: int) -> int:
        """Delete posts with posted_at older than the retention horizon."""
        if retention_days < MIN_RETENTION_DAYS:
            raise ValueError(
                f"retention_days must be >= {MIN_RETENTION_DAYS}, got {retention_days}"
            )
        cutoff = now - retention_days * 86400
        with self._lock, self._conn:
            cursor = self._conn.execute(
                "DELETE FROM posts WHERE posted_at < ?", (cutoff,)
            )
            return cursor.rowcount

    # -- reads ----------------------------------------------------------

    def get(self, post_id: str) -> Post | None:
        with self._lock:
            row = self._conn.execute(
                f"SELECT {_COLUMNS} FROM posts WHERE post_id = ?", (post_id,)
            ).fetchone()
        return _row_to_post(row) if row else None

    def count(self) -> int:
        with self._lock:
            return self._conn.execute("SELECT COUNT(*) FROM posts").fetchone()[0]

    def latest_posted_at(self, page_id: str) -> int | None:
        with self._lock:
            value = self._conn.execute(
                "SELECT MAX(posted_at) FROM posts WHERE page_id = ?", (page_id,)
            ).fetchone()[0]
        return value

    def posts_in_interval(self, since: int, until: int) -> list[Post]:
        """All posts with posted_at in [since, until), unranked."""
        with self._lock:
            rows = self._conn.execute(
                f"SELECT {_COLUMNS} FROM posts WHERE posted_at >= ? AND posted_at < ? "
                "ORDER BY posted_at, post_id",
                (since, until),
            ).fetchall()
        return [_row_to_post(r) for r in rows]

    def query(self, spec: QuerySpec, now: int | None = None) -> tuple[list[Post], int]:
        """Filter, order, and slice posts; returns (page, total_matching)."""
        effective_now = int(time.time()) if now is None else now
        validate_query(spec, effective_now, self.retention_days)

        clauses = ["posted_at >= ?", "posted_at < ?"]
        params: list = [spec.since, spec.until]
        if spec.keyword is not None and spec.keyword != "":
            clauses.append("instr(message_folded, ?) > 0")
            params.append(spec.keyword.casefold())
        if spec.page_ids is not None:
            if not spec.page_ids:
                return [], 0
            placeholders = ",".join("?" for _ in spec.page_ids)
            clauses.append(f"page_id IN ({placeholders})")
            params.extend(sorted(spec.page_ids))

        sql = f"SELECT {_COLUMNS} FROM posts WHERE {' AND '.join(clauses)}"
        with self._lock:
            rows = self._conn.execute(sql, params).fetchall()

        matches = [_row_to_post(r) for r in rows]
        matches.sort(key=ranking.sort_key(spec.sort, spec.descending))
        total = len(matches)
        page = matches[spec.offset : spec.offset + spec.limit]
        return page, total

    # -- bulk -----------------------------------------------------------

    def export(self, fp: IO[str]) -> int:
        """Write every stored post in the shared record serialization.

        Output order is (page_id, posted_at, post_id), so exports of
        identical contents are byte-identical.
        """
        with self._lock:
            rows = self._conn.execute(
                f"SELECT {_COLUMNS} FROM posts ORDER BY page_id, posted_at, post_id"
            ).fetchall()
        return write_records((FeedRecord.from_post(_row_to_post(r)) for r in rows), fp)

    def load_records(self, records: Iterable[FeedRecord]) -> int:
        """Seed the store from exported records; returns posts inserted."""
        inserted = 0
        for record in records:
            if self.insert_post(record.to_post()):
                inserted += 1
        return inserted

    def close(self) -> None:
        with self._lock:
            self._conn.close()

    def __enter__(self) -> PostStore:
        return self

    def __exit__(self, *exc_info) -> None:
        self.close()


def _row_to_post(row: tuple) -> Post:
    return Post(
        post_id=row[0],
        page_id=row[1],
        posted_at=row[2],
        retrieved_at=row[3],
        message=row[4],
        link_url=row[5],
        image_url=row[6],
        permalink=row[7],
        engagement=EngagementCounts(
            like=row[8],
            comment=row[9],
            share=row[10],
            love=row[11],
            haha=row[12],
            wow=row[13],
            sad=row[14],
            angry=row[15],
        ),
    )
