"""HTTP/JSON query surface: posts, top10, grid, publishers.

Responses mirror the store and ranking layers exactly; handlers never
re-rank or re-filter.  All parameters arrive as strings and are
validated by hand so that every 4xx body is the same error shape:
``{"code": ..., "message": ..., "field": ...}``.

Timestamps cross the wire as ISO-8601 UTC.  Age-adjusted metric values
are serialized as plain decimal strings (12 significant digits) so
clients never parse floats.  Engagement data is aggregate counts only;
nothing in any payload names a person.
"""

from __future__ import annotations

import time as time_module
from datetime import time
from typing import Callable
from urllib.parse import quote

from fastapi import FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse
from fastapi.staticfiles import StaticFiles
from starlette.exceptions import HTTPException as StarletteHTTPException

from . import ranking
from .config import Publisher
from .domain import COUNTER_BASES, MetricBase, MetricKey, Post, format_decimal, metric_value
from .records import format_timestamp, parse_timestamp, RecordError
from .store import MAX_QUERY_LIMIT, PostStore, QuerySpec, QueryValidationError

EXPLORER_WINDOW_SECONDS = 31 * 86400
GRID_K = 256
TOP10_K = 10
EXCERPT_LIMIT = 280

TOP_METRIC = MetricKey(base=MetricBase.ALL, age_adjusted=True)


class ApiErrorResponse(Exception):
    def __init__(self, status: int, code: str, message: str, field: str | None = None):
        self.status = status
        self.body = {"code": code, "message": message, "field": field}
        super().__init__(message)


def _bad_param(field: str, message: str) -> ApiErrorResponse:
    return ApiErrorResponse(400, "invalid_parameter", message, field)


def _parse_int(value: str, field: str) -> int:
    try:
        return int(value)
    except ValueError:
        raise _bad_param(field, f"{field} must be an integer") from None


def _parse_when(value: str, field: str) -> int:
    try:
        return parse_timestamp(value)
    except RecordError:
        raise _bad_param(
            field, f"{field} must be an ISO-8601 UTC timestamp"
        ) from None


def serialize_post(post: Post, page_names: dict[str, str]) -> dict:
    """One post in the wire shape, with raw and age-adjusted metrics."""
    engagement = {b.value: post.engagement.counter(b) for b in COUNTER_BASES}
    engagement["all"] = post.engagement.total
    age_adjusted = {
        b.value: format_decimal(
            metric_value(post, MetricKey(base=b, age_adjusted=True))
        )
        for b in COUNTER_BASES
    }
    age_adjusted["all"] = format_decimal(
        metric_value(post, MetricKey(base=MetricBase.ALL, age_adjusted=True))
    )
    return {
        "post_id": post.post_id,
        "page_id": post.page_id,
        "page_name": page_names.get(post.page_id, post.page_id),
        "posted_at": format_timestamp(post.posted_at),
        "retrieved_at": format_timestamp(post.retrieved_at),
        "message": post.message,
        "link_url": post.link_url,
        "image_url": post.image_url,
        "permalink": post.permalink,
        "engagement": engagement,
        "age_adjusted": age_adjusted,
    }


def message_excerpt(message: str, limit: int = EXCERPT_LIMIT) -> str:
    if len(message) <= limit:
        return message
    return message[: limit - 1] + "…"


def explorer_link(post_id: str) -> str:
    return f"/?view=explorer&focus={quote(post_id, safe='')}"


def _window_payload(window: ranking.DailyWindow) -> dict:
    return {
        "cutoff": format_timestamp(window.cutoff_time),
        "start": format_timestamp(window.start),
    }


def create_app(
    store: PostStore,
    publishers: list[Publisher],
    tz: str = ranking.DEFAULT_TIMEZONE,
    cutoff_local_time: time = ranking.DEFAULT_CUTOFF,
    clock: Callable[[], float] = time_module.time,
    static_dir: str | None = None,
) -> FastAPI:
    app = FastAPI(title="feedgrid", docs_url=None, redoc_url=None)
    page_names = {p.page_id: p.page_name for p in publishers}
    top10_cache = ranking.SingleFlightCache()
    grid_cache = ranking.SingleFlightCache()

    @app.exception_handler(ApiErrorResponse)
    async def on_api_error(request: Request, exc: ApiErrorResponse):
        return JSONResponse(status_code=exc.status, content=exc.body)

    @app.exception_handler(StarletteHTTPException)
    async def on_http_error(request: Request, exc: StarletteHTTPException):
        return JSONResponse(
            status_code=exc.status_code,
            content={"code": "http_error", "message": str(exc.detail), "field": None},
        )

    @app.exception_handler(RequestValidationError)
    async def on_validation_error(request: Request, exc: RequestValidationError):
        return JSONResponse(
            status_code=400,
            content={"code": "invalid_parameter", "message": str(exc), "field": None},
        )

    def current_window() -> ranking.DailyWindow:
        return ranking.current_daily_window(
            int(clock()), tz=tz, cutoff_local_time=cutoff_local_time
        )

    @app.get("/api/posts")
    def get_posts(request: Request):
        params = request.query_params
        now = int(clock())

        limit_raw = params.get("limit")
        limit = 50
        if limit_raw is not None:
            limit = _parse_int(limit_raw, "limit")
            if limit > MAX_QUERY_LIMIT:
                raise ApiErrorResponse(
                    413,
                    "limit_too_large",
                    f"limit must not exceed {MAX_QUERY_LIMIT}",
                    "limit",
                )
            if limit < 1:
                raise _bad_param("limit", "limit must be >= 1")

        offset = 0
        if params.get("offset") is not None:
            offset = _parse_int(params["offset"], "offset")
            if offset < 0:
                raise _bad_param("offset", "offset must be >= 0")

        sort = params.get("sort", ranking.SORT_NEWEST)
        if sort not in ranking.SORT_TOKENS:
            raise _bad_param("sort", f"unknown sort key {sort!r}")

        direction = params.get("dir", "desc")
        if direction not in ("asc", "desc"):
            raise _bad_param("dir", "dir must be `asc` or `desc`")

        until = now
        if params.get("until") is not None:
            until = _parse_when(params["until"], "until")
        since = now - EXPLORER_WINDOW_SECONDS
        if params.get("since") is not None:
            since = _parse_when(params["since"], "since")
        if since > until:
            raise _bad_param("since", "since must not be later than until")

        page_ids = frozenset(params.getlist("publisher")) or None

        spec = QuerySpec(
            since=since,
            until=until,
            keyword=params.get("q"),
            page_ids=page_ids,
            sort=sort,
            descending=(direction == "desc"),
            offset=offset,
            limit=limit,
        )
        try:
            posts, total = store.query(spec, now=now)
        except QueryValidationError as exc:
            raise ApiErrorResponse(400, "invalid_parameter", exc.reason, exc.field)

        return {
            "posts": [serialize_post(p, page_names) for p in posts],
            "total": total,
            "offset": offset,
            "limit": limit,
        }

    @app.get("/api/top10")
    def get_top10():
        window = current_window()

        def compute() -> dict:
            posts = store.posts_in_interval(window.start, window.cutoff_time)
            view = ranking.top_k(posts, window, TOP10_K, TOP_METRIC)
            return {
                "window": _window_payload(window),
                "posts": [serialize_post(e.post, page_names) for e in view.entries],
            }

        return top10_cache.get(window.cutoff_time, compute)

    @app.get("/api/grid")
    def get_grid():
        window = current_window()

        def compute() -> dict:
            posts = store.posts_in_interval(window.start, window.cutoff_time)
            view = ranking.top_k(posts, window, GRID_K, TOP_METRIC)
            entries = []
            for entry in view.entries:
                post = entry.post
                engagement = {
                    b.value: post.engagement.counter(b) for b in COUNTER_BASES
                }
                engagement["all"] = post.engagement.total
                entries.append(
                    {
                        "post_id": post.post_id,
                        "image_url": post.image_url,
                        "popup": {
                            "page_name": page_names.get(post.page_id, post.page_id),
                            "posted_at": format_timestamp(post.posted_at),
                            "message": message_excerpt(post.message),
                            "engagement": engagement,
                        },
                        "explorer_link": explorer_link(post.post_id),
                    }
                )
            return {"window": _window_payload(window), "entries": entries}

        return grid_cache.get(window.cutoff_time, compute)

    @app.get("/api/publishers")
    def get_publishers():
        ordered = sorted(publishers, key=lambda p: (p.page_name, p.page_id))
        return [
            {
                "page_id": p.page_id,
                "page_name": p.page_name,
                "site_base_url": p.site_base_url,
            }
            for p in ordered
        ]

    if static_dir is not None:
        app.mount("/", StaticFiles(directory=static_dir, html=True), name="static")

    return app
