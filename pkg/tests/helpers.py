"""Shared test fixtures and independent oracles.

The oracles here deliberately avoid the library's ranking/query code
paths: ordering is done with hand-rolled comparators (cross-multiplied
integer ratios, no Fraction), filtering with plain Python, so that
equality against the real implementation is a meaningful check.
"""

from __future__ import annotations

import calendar
import functools
import random

from feedgrid.config import Publisher
from feedgrid.domain import EngagementCounts, Post


def utc(
    year: int, month: int, day: int, hour: int = 0, minute: int = 0, second: int = 0
) -> int:
    return calendar.timegm((year, month, day, hour, minute, second))


def parse_timestamp_for_tests(iso: str) -> int:
    """ISO-UTC -> epoch, independent of the library's parser."""
    import re

    match = re.fullmatch(r"(\d{4})-(\d{2})-(\d{2})T(\d{2}):(\d{2}):(\d{2})Z", iso)
    assert match, f"unexpected wire timestamp {iso!r}"
    return calendar.timegm(tuple(int(g) for g in match.groups()))


FIXTURE_NOW = utc(2018, 11, 20, 12, 0, 0)

# Hand-tabulated: 2018-11-19 17:00 in New York is EST (UTC-5), so 22:00 UTC.
FIXTURE_WINDOW_END = utc(2018, 11, 19, 22, 0, 0)
FIXTURE_WINDOW_START = FIXTURE_WINDOW_END - 86400

FIXTURE_PAGES = [
    ("pg00", "Zephyr Post", "zephyrpost.example"),
    ("pg01", "Acorn Daily", "acorndaily.example"),
    ("pg02", "Marble Wire", "marblewire.example"),
    ("pg03", "Quill Report", "quillreport.example"),
    ("pg04", "Beacon Feed", "beaconfeed.example"),
    ("pg05", "Lantern News", "lanternnews.example"),
    ("pg06", "Crow Herald", "crowherald.example"),
    ("pg07", "垣根通信", "kakine.example"),
    ("pg08", "Nimbus Press", "nimbuspress.example"),
    ("pg09", "Ember Gazette", "embergazette.example"),
]

_WORDS = [
    "election",
    "Election",
    "ELECTION",
    "midterms",
    "ballot",
    "Senate",
    "turnout",
    "América",
    "Größe",
    "rally",
    "débat",
    "poll",
    "vote",
    "VOTE",
    "county",
    "governor",
    "caucus",
    "recount",
]


def fixture_publishers() -> list[Publisher]:
    return [Publisher(*row) for row in FIXTURE_PAGES]


def _random_engagement(rng: random.Random) -> EngagementCounts:
    def counter() -> int:
        if rng.random() < 0.15:
            return int(rng.expovariate(1 / 800))
        return rng.randint(0, 60)

    return EngagementCounts(
        like=counter(),
        comment=counter(),
        share=counter(),
        love=counter(),
        haha=counter(),
        wow=counter(),
        sad=counter(),
        angry=counter(),
    )


def _make_post(
    rng: random.Random,
    index: int,
    posted_at: int,
    engagement: EngagementCounts | None = None,
    delta: int | None = None,
) -> Post:
    page_id, _, _ = FIXTURE_PAGES[index % len(FIXTURE_PAGES)]
    if delta is None:
        delta = rng.randint(0, 3600)
    if engagement is None:
        engagement = _random_engagement(rng)
    message = ""
    if rng.random() > 0.05:
        message = " ".join(rng.choice(_WORDS) for _ in range(rng.randint(3, 16)))
    post_id = f"{page_id}:{index:05d}"
    return Post(
        post_id=post_id,
        page_id=page_id,
        posted_at=posted_at,
        retrieved_at=posted_at + delta,
        message=message,
        link_url=(
            f"https://{FIXTURE_PAGES[index % len(FIXTURE_PAGES)][2]}/a/{index}"
            if rng.random() < 0.8
            else None
        ),
        image_url=(
            f"https://img.example/{page_id}/{index}.jpg" if rng.random() < 0.7 else None
        ),
        permalink=f"https://social.example/{page_id}/posts/{index}",
        engagement=engagement,
    )


def make_posts(n: int, seed: int = 7, start: int | None = None, span: int = 30 * 86400) -> list[Post]:
    """Small uniform corpus for targeted tests."""
    rng = random.Random(seed)
    lower = (FIXTURE_NOW - span) if start is None else start
    return [
        _make_post(rng, i, rng.randint(lower, lower + span - 3601)) for i in range(n)
    ]


def make_fixture_posts(n: int = 1000, seed: int = 20181106) -> list[Post]:
    """Deterministic synthetic corpus: ``n`` (>= 400) posts across 10 pages.

    350 posts land inside the daily window ending 2018-11-19 22:00 UTC
    (so grid-sized top-K selections have more than 256 candidates);
    the rest spread over the 30 days before FIXTURE_NOW.  A few posts
    at fixed indexes exercise edge cases: zero age, identical
    engagement, equal age-adjusted ratios at different magnitudes.
    """
    if n < 400:
        raise ValueError("fixture corpus is sized for n >= 400")
    rng = random.Random(seed)
    posts: list[Post] = []

    for i in range(n - 350):
        posted_at = rng.randint(FIXTURE_NOW - 30 * 86400, FIXTURE_NOW - 3601)
        posts.append(_make_post(rng, i, posted_at))

    for j in range(344):
        i = (n - 350) + j
        posted_at = rng.randint(FIXTURE_WINDOW_START, FIXTURE_WINDOW_END - 1)
        posts.append(_make_post(rng, i, posted_at))

    base = FIXTURE_WINDOW_START + 7200
    crafted = [
        # zero age: retrieved the second it was posted
        _make_post(rng, n - 6, base, delta=0),
        # identical engagement + posted_at on two pages: post_id tie-break
        _make_post(rng, n - 5, base + 100, engagement=EngagementCounts(like=7), delta=50),
        _make_post(rng, n - 4, base + 100, engagement=EngagementCounts(like=7), delta=50),
        # equal like/age ratios at different magnitudes (both exactly 1.0)
        _make_post(rng, n - 3, base + 200, engagement=EngagementCounts(like=10), delta=10),
        _make_post(rng, n - 2, base + 300, engagement=EngagementCounts(like=1), delta=1),
        # all-zero engagement
        _make_post(rng, n - 1, base + 400, engagement=EngagementCounts(), delta=900),
    ]
    posts.extend(crafted)
    assert len(posts) == n
    assert len({p.post_id for p in posts}) == n
    return posts


# 49 hand-labeled junk sources with the criteria tags they satisfy, as they
# appear in the curation ledger (spelling quirks like CR/CT/"JN AGG" included:
# the parser must absorb them).
LABELED_JUNK_SOURCES: list[tuple[str, list[str]]] = [
    ("breitbart.com", ["RB", "S", "Cr", "P"]),
    ("thegatewaypundit.com", ["RB", "S", "Cr", "P"]),
    ("libertyheadlines.com", ["RB", "S", "Cr"]),
    ("theblacksphere.net", ["RB", "Cr", "S", "P"]),
    ("dailywire.com", ["RB", "S", "Cr"]),
    ("thefederalist.com", ["RB", "S", "Cr"]),
    ("rawstory.com", ["LB", "Cr", "P"]),
    ("thedailydigest.org", ["CR", "Ct", "RB", "P"]),
    ("lifenews.com", ["RB", "S", "Cr", "P"]),
    ("infowars.com", ["RB", "S", "Cr", "P"]),
    ("dailycaller.com", ["RB", "S", "P"]),
    ("zerohedge.com", ["Cr", "P", "S"]),
    ("barenakedislam.com", ["RB", "S", "Cr", "P"]),
    ("pjmedia.com", ["P", "Ct", "Cr"]),
    ("americanthinker.com", ["RB", "S", "Cr", "Ct"]),
    ("newrightnetwork.com", ["Ct", "S", "RB"]),
    ("gellerreport.com", ["RB", "S", "Cr", "Ct"]),
    ("davidharrisjr.com", ["RB", "S", "P"]),
    ("theoldschoolpatriot.com", ["S", "RB", "Cr"]),
    ("100percentfedup.com", ["RB", "S", "Cr", "P"]),
    ("committedconservative.com", ["RB", "S", "Cr", "P"]),
    ("truthfeednews.com", ["P", "Ct", "Cr", "RB"]),
    ("michaelsavage.com", ["RB", "S", "Cr"]),
    ("bigleaguepolitics.com", ["RB", "S", "Cr"]),
    ("cnsnews.com", ["RB", "S", "Cr", "P"]),
    ("truepundit.com", ["RB", "S", "P"]),
    ("thepoliticalinsider.com", ["P", "Cr", "Ct", "RB"]),
    ("hotair.com", ["RB", "S", "Cr"]),
    ("lifezette.com", ["RB", "S", "Cr", "P"]),
    ("canadafreepress.com", ["RB", "S", "Cr", "P"]),
    ("shareblue.com", ["LB", "P", "CT"]),
    ("wnd.com", ["Ct", "RB", "P"]),
    ("bizpacreview.com", ["RB", "S", "P"]),
    ("rushlimbaugh.com", ["RB", "P", "S"]),
    ("theblaze.com", ["P", "RB", "Ct"]),
    ("frontpagemag.com", ["RB", "S", "Cr", "P"]),
    ("redstate.com", ["RB", "S", "Ct", "P"]),
    ("palmerreport.com", ["LB", "P", "S"]),
    ("chicksonright.com", ["RB", "S", "Cr"]),
    ("nworeport.me", ["S", "RB", "P", "Ct"]),
    ("en-volve.com", ["RB", "S", "Cr"]),
    ("magaoneradio.net", ["RB", "S", "P", "JN AGG"]),
    ("twitchy.com", ["S", "RB", "P"]),
    ("naturalnews.com", ["RB", "S", "Cr", "P"]),
    ("westernfreepress.com", ["P", "S", "RB"]),
    ("legalinsurrection.com", ["RB", "S", "P", "Ct"]),
    ("conservativedailypost.com", ["RB", "S", "Cr", "P"]),
    ("therightscoop.com", ["RB", "S", "P"]),
    ("conspiracydailyupdate.com", ["Cr", "S", "JN AGG"]),
]


def as_feed_record(post: Post):
    """Connector-side view of a post: no retrieval time yet."""
    from feedgrid.records import FeedRecord

    return FeedRecord(
        post_id=post.post_id,
        page_id=post.page_id,
        posted_at=post.posted_at,
        message=post.message,
        link_url=post.link_url,
        image_url=post.image_url,
        permalink=post.permalink,
        engagement=post.engagement,
    )


def write_connector_fixture(fixture_dir, records_by_page) -> None:
    """Lay out per-page JSONL files the FixtureConnector reads."""
    import os

    from feedgrid.records import write_records

    os.makedirs(fixture_dir, exist_ok=True)
    for page_id, records in records_by_page.items():
        with open(
            os.path.join(fixture_dir, f"{page_id}.jsonl"), "w", encoding="utf-8"
        ) as fp:
            write_records(records, fp)


# ---------------------------------------------------------------------------
# Oracles
# ---------------------------------------------------------------------------

_BASES = ("like", "comment", "share", "love", "haha", "wow", "sad", "angry")


def naive_total(post: Post) -> int:
    e = post.engagement
    return e.like + e.comment + e.share + e.love + e.haha + e.wow + e.sad + e.angry


def naive_age(post: Post) -> int:
    age = post.retrieved_at - post.posted_at
    return age if age >= 1 else 1


def naive_counter(post: Post, base: str) -> int:
    if base == "all":
        return naive_total(post)
    return getattr(post.engagement, base)


def _cmp(a, b) -> int:
    return (a > b) - (a < b)


def naive_compare(a: Post, b: Post, sort: str, descending: bool = True) -> int:
    """Reference ordering: ratios compared by cross-multiplication."""
    if sort == "newest":
        primary = -_cmp(a.posted_at, b.posted_at)
    elif sort == "oldest":
        primary = _cmp(a.posted_at, b.posted_at)
    else:
        base, _, kind = sort.rpartition("_")
        ca, cb = naive_counter(a, base), naive_counter(b, base)
        if kind == "raw":
            primary = _cmp(ca, cb)
        else:
            # ca/age_a vs cb/age_b without division
            primary = _cmp(ca * naive_age(b), cb * naive_age(a))
        if descending:
            primary = -primary
    if primary != 0:
        return primary
    tie = -_cmp(a.posted_at, b.posted_at)
    if tie != 0:
        return tie
    return _cmp(a.post_id, b.post_id)


def naive_sorted(posts: list[Post], sort: str, descending: bool = True) -> list[Post]:
    return sorted(
        posts,
        key=functools.cmp_to_key(
            lambda a, b: naive_compare(a, b, sort, descending)
        ),
    )


def naive_query(
    posts: list[Post],
    since: int,
    until: int,
    keyword: str | None = None,
    page_ids: frozenset[str] | None = None,
    sort: str = "newest",
    descending: bool = True,
    offset: int = 0,
    limit: int = 50,
) -> tuple[list[Post], int]:
    """Filter-sort-slice reference for store.query."""
    matches = []
    for p in posts:
        if not (since <= p.posted_at < until):
            continue
        if keyword and keyword.casefold() not in p.message.casefold():
            continue
        if page_ids is not None and p.page_id not in page_ids:
            continue
        matches.append(p)
    ordered = naive_sorted(matches, sort, descending)
    return ordered[offset : offset + limit], len(ordered)


def naive_top_k(posts: list[Post], start: int, end: int, k: int, metric: str) -> list[Post]:
    """Full-sort reference for rank.top_k (metric token must be *_raw/*_adj)."""
    in_window = [p for p in posts if start <= p.posted_at < end]
    return naive_sorted(in_window, metric, descending=True)[:k]


# ---------------------------------------------------------------------------
# Wire schemas for the four endpoints
# ---------------------------------------------------------------------------

_ISO_UTC = {"type": "string", "pattern": r"^\d{4}-\d{2}-\d{2}T\d{2}:\d{2}:\d{2}Z$"}
_DECIMAL = {"type": "string", "pattern": r"^\d+(\.\d+)?$"}
_COUNTER = {"type": "integer", "minimum": 0}
_NINE_KEYS = ("like", "comment", "share", "love", "haha", "wow", "sad", "angry", "all")

API_POST_SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "required": [
        "post_id",
        "page_id",
        "page_name",
        "posted_at",
        "retrieved_at",
        "message",
        "link_url",
        "image_url",
        "permalink",
        "engagement",
        "age_adjusted",
    ],
    "properties": {
        "post_id": {"type": "string", "minLength": 1},
        "page_id": {"type": "string", "minLength": 1},
        "page_name": {"type": "string", "minLength": 1},
        "posted_at": _ISO_UTC,
        "retrieved_at": _ISO_UTC,
        "message": {"type": "string"},
        "link_url": {"type": ["string", "null"]},
        "image_url": {"type": ["string", "null"]},
        "permalink": {"type": "string", "minLength": 1},
        "engagement": {
            "type": "object",
            "additionalProperties": False,
            "required": list(_NINE_KEYS),
            "properties": {k: _COUNTER for k in _NINE_KEYS},
        },
        "age_adjusted": {
            "type": "object",
            "additionalProperties": False,
            "required": list(_NINE_KEYS),
            "properties": {k: _DECIMAL for k in _NINE_KEYS},
        },
    },
}

_WINDOW_SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "required": ["cutoff", "start"],
    "properties": {"cutoff": _ISO_UTC, "start": _ISO_UTC},
}

POSTS_RESPONSE_SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "required": ["posts", "total", "offset", "limit"],
    "properties": {
        "posts": {"type": "array", "items": API_POST_SCHEMA},
        "total": {"type": "integer", "minimum": 0},
        "offset": {"type": "integer", "minimum": 0},
        "limit": {"type": "integer", "minimum": 1},
    },
}

TOP10_RESPONSE_SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "required": ["window", "posts"],
    "properties": {
        "window": _WINDOW_SCHEMA,
        "posts": {"type": "array", "items": API_POST_SCHEMA, "maxItems": 10},
    },
}

GRID_RESPONSE_SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "required": ["window", "entries"],
    "properties": {
        "window": _WINDOW_SCHEMA,
        "entries": {
            "type": "array",
            "maxItems": 256,
            "items": {
                "type": "object",
                "additionalProperties": False,
                "required": ["post_id", "image_url", "popup", "explorer_link"],
                "properties": {
                    "post_id": {"type": "string", "minLength": 1},
                    "image_url": {"type": ["string", "null"]},
                    "explorer_link": {"type": "string", "minLength": 1},
                    "popup": {
                        "type": "object",
                        "additionalProperties": False,
                        "required": [
                            "page_name",
                            "posted_at",
                            "message",
                            "engagement",
                        ],
                        "properties": {
                            "page_name": {"type": "string", "minLength": 1},
                            "posted_at": _ISO_UTC,
                            "message": {"type": "string", "maxLength": 280},
                            "engagement": {
                                "type": "object",
                                "additionalProperties": False,
                                "required": list(_NINE_KEYS),
                                "properties": {k: _COUNTER for k in _NINE_KEYS},
                            },
                        },
                    },
                },
            },
        },
    },
}

PUBLISHERS_RESPONSE_SCHEMA = {
    "type": "array",
    "items": {
        "type": "object",
        "additionalProperties": False,
        "required": ["page_id", "page_name", "site_base_url"],
        "properties": {
            "page_id": {"type": "string", "minLength": 1},
            "page_name": {"type": "string", "minLength": 1},
            "site_base_url": {"type": "string", "minLength": 1},
        },
    },
}

API_ERROR_SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "required": ["code", "message", "field"],
    "properties": {
        "code": {"type": "string", "minLength": 1},
        "message": {"type": "string", "minLength": 1},
        "field": {"type": ["string", "null"]},
    },
}
