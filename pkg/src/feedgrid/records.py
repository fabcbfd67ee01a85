"""Post record serialization: JSON Lines with fixed, self-describing field names.

One record per line, one JSON object per record.  The same format is
used for connector fixture files (one file per page) and for store
exports, so an export can seed a fresh deployment or a test.

Field names are stable:

    post_id, page_id, posted_at, message, link_url, image_url,
    permalink, like, comment, share, love, haha, wow, sad, angry

plus ``retrieved_at``, present only in records that describe an
already-stored post (exports).  Connector fixtures omit it; retrieval
time is assigned at ingestion.  Timestamps are ISO-8601 UTC with a
trailing ``Z``.  ``link_url`` and ``image_url`` may be null.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from datetime import datetime, timezone
from typing import IO, Iterable, Iterator

from .domain import COUNTER_BASES, EngagementCounts, Post

_REQUIRED_FIELDS = (
    "post_id",
    "page_id",
    "posted_at",
    "message",
    "permalink",
) + tuple(b.value for b in COUNTER_BASES)


class RecordError(ValueError):
    """A record line that does not conform to the documented format."""


def format_timestamp(epoch_seconds: int) -> str:
    """Epoch seconds -> ``YYYY-MM-DDTHH:MM:SSZ``."""
    return datetime.fromtimestamp(epoch_seconds, tz=timezone.utc).strftime(
        "%Y-%m-%dT%H:%M:%SZ"
    )


def parse_timestamp(value: str) -> int:
    """ISO-8601 UTC string -> epoch seconds.  Accepts ``Z`` or an explicit offset."""
    if not isinstance(value, str):
        raise RecordError(f"timestamp must be a string, got {value!r}")
    text = value.strip()
    if text.endswith("Z"):
        text = text[:-1] + "+00:00"
    try:
        parsed = datetime.fromisoformat(text)
    except ValueError:
        raise RecordError(f"unparseable timestamp {value!r}") from None
    if parsed.tzinfo is None:
        parsed = parsed.replace(tzinfo=timezone.utc)
    return int(parsed.timestamp())


@dataclass(frozen=True)
class FeedRecord:
    """One post as described by a page feed, before or after storage.

    ``retrieved_at`` is None for records coming from a connector (the
    post has not been ingested yet) and set for records exported from
    the store.
    """

    post_id: str
    page_id: str
    posted_at: int
    message: str
    link_url: str | None
    image_url: str | None
    permalink: str
    engagement: EngagementCounts
    retrieved_at: int | None = None

    def to_post(self, retrieved_at: int | None = None) -> Post:
        """Materialize a Post, assigning retrieval time if the record lacks one."""
        when = self.retrieved_at if retrieved_at is None else retrieved_at
        if when is None:
            raise ValueError(f"record {self.post_id} has no retrieval time")
        return Post(
            post_id=self.post_id,
            page_id=self.page_id,
            posted_at=self.posted_at,
            retrieved_at=when,
            message=self.message,
            link_url=self.link_url,
            image_url=self.image_url,
            permalink=self.permalink,
            engagement=self.engagement,
        )

    @classmethod
    def from_post(cls, post: Post) -> FeedRecord:
        return cls(
            post_id=post.post_id,
            page_id=post.page_id,
            posted_at=post.posted_at,
            message=post.message,
            link_url=post.link_url,
            image_url=post.image_url,
            permalink=post.permalink,
            engagement=post.engagement,
            retrieved_at=post.retrieved_at,
        )


def record_to_obj(record: FeedRecord) -> dict:
    """Record -> plain dict in canonical field order."""
    obj: dict = {
        "post_id": record.post_id,
        "page_id": record.page_id,
        "posted_at": format_timestamp(record.posted_at),
    }
    if record.retrieved_at is not None:
        obj["retrieved_at"] = format_timestamp(record.retrieved_at)
    obj["message"] = record.message
    obj["link_url"] = record.link_url
    obj["image_url"] = record.image_url
    obj["permalink"] = record.permalink
    for base in COUNTER_BASES:
        obj[base.value] = record.engagement.counter(base)
    return obj


def record_from_obj(obj: dict) -> FeedRecord:
    """Plain dict -> record, validating presence and types of every field."""
    if not isinstance(obj, dict):
        raise RecordError(f"record must be an object, got {type(obj).__name__}")
    missing = [f for f in _REQUIRED_FIELDS if f not in obj]
    if missing:
        raise RecordError(f"record missing fields: {', '.join(missing)}")

    counters = {}
    for base in COUNTER_BASES:
        value = obj[base.value]
        if not isinstance(value, int) or isinstance(value, bool) or value < 0:
            raise RecordError(
                f"counter {base.value} must be a non-negative integer, got {value!r}"
            )
        counters[base.value] = value

    for field in ("post_id", "page_id", "message", "permalink"):
        if not isinstance(obj[field], str):
            raise RecordError(f"{field} must be a string, got {obj[field]!r}")
    for field in ("link_url", "image_url"):
        value = obj.get(field)
        if value is not None and not isinstance(value, str):
            raise RecordError(f"{field} must be a string or null, got {value!r}")

    posted_at = parse_timestamp(obj["posted_at"])
    retrieved_at = None
    if obj.get("retrieved_at") is not None:
        retrieved_at = parse_timestamp(obj["retrieved_at"])
        if retrieved_at < posted_at:
            raise RecordError(
                f"record {obj['post_id']!r} retrieved before posted"
            )

    return FeedRecord(
        post_id=obj["post_id"],
        page_id=obj["page_id"],
        posted_at=posted_at,
        message=obj["message"],
        link_url=obj.get("link_url"),
        image_url=obj.get("image_url"),
        permalink=obj["permalink"],
        engagement=EngagementCounts(**counters),
        retrieved_at=retrieved_at,
    )


def dump_record(record: FeedRecord) -> str:
    """One record as one JSON line (no trailing newline)."""
    return json.dumps(record_to_obj(record), ensure_ascii=False, separators=(",", ":"))


def load_record(line: str) -> FeedRecord:
    try:
        obj = json.loads(line)
    except json.JSONDecodeError as exc:
        raise RecordError(f"invalid JSON record: {exc}") from None
    return record_from_obj(obj)


def write_records(records: Iterable[FeedRecord], fp: IO[str]) -> int:
    """Write records as JSON Lines; returns the number written."""
    count = 0
    for record in records:
        fp.write(dump_record(record))
        fp.write("\n")
        count += 1
    return count


def read_records(fp: IO[str]) -> Iterator[FeedRecord]:
    """Parse a JSON Lines stream; blank lines are skipped."""
    for line_no, line in enumerate(fp, start=1):
        stripped = line.strip()
        if not stripped:
            continue
        try:
            yield load_record(stripped)
        except RecordError as exc:
            raise RecordError(f"line {line_no}: {exc}") from None


def read_record_file(path: str) -> list[FeedRecord]:
    with open(path, "r", encoding="utf-8") as fp:
        return list(read_records(fp))
