"""Service configuration: tracked pages, polling, storage, serving.

One JSON file drives the whole service.  The tracked publisher list can
be inline (``publishers``) or referenced (``publishers_file``, pointing
at the JSON array the curation pipeline's ``select`` step writes).
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field
from datetime import time
from zoneinfo import ZoneInfo, ZoneInfoNotFoundError

from .store import MIN_RETENTION_DAYS


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class Publisher:
    page_id: str
    page_name: str
    site_base_url: str


@dataclass
class ServiceConfig:
    publishers: list[Publisher] = field(default_factory=list)
    poll_interval_seconds: int = 3600
    max_requests_per_hour: int = 200
    store_path: str = "posts.db"
    retention_days: int = 45
    timezone: str = "America/New_York"
    cutoff_local_time: time = time(hour=17, minute=0)
    fixture_dir: str | None = None
    bind_host: str = "127.0.0.1"
    bind_port: int = 8080
    static_dir: str | None = None

    @property
    def page_ids(self) -> list[str]:
        return [p.page_id for p in self.publishers]


def _parse_cutoff(value: str) -> time:
    parts = value.split(":")
    if len(parts) != 2:
        raise ConfigError(f"cutoff_local_time must be HH:MM, got {value!r}")
    try:
        hour, minute = int(parts[0]), int(parts[1])
        return time(hour=hour, minute=minute)
    except ValueError:
        raise ConfigError(f"cutoff_local_time must be HH:MM, got {value!r}") from None


def parse_publishers(data: object, origin: str = "publishers") -> list[Publisher]:
    if not isinstance(data, list):
        raise ConfigError(f"{origin} must be a JSON array")
    publishers = []
    seen = set()
    for i, entry in enumerate(data):
        if not isinstance(entry, dict):
            raise ConfigError(f"{origin}[{i}] must be an object")
        try:
            publisher = Publisher(
                page_id=str(entry["page_id"]),
                page_name=str(entry["page_name"]),
                site_base_url=str(entry["site_base_url"]),
            )
        except KeyError as exc:
            raise ConfigError(f"{origin}[{i}] missing field {exc}") from None
        if publisher.page_id in seen:
            raise ConfigError(f"{origin}[{i}] duplicate page_id {publisher.page_id!r}")
        seen.add(publisher.page_id)
        publishers.append(publisher)
    return publishers


def load_publishers(path: str) -> list[Publisher]:
    with open(path, "r", encoding="utf-8") as fp:
        return parse_publishers(json.load(fp), origin=path)


def load_config(path: str) -> ServiceConfig:
    """Parse and validate the service config; all errors are ConfigError."""
    with open(path, "r", encoding="utf-8") as fp:
        try:
            raw = json.load(fp)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: invalid JSON: {exc}") from None
    if not isinstance(raw, dict):
        raise ConfigError(f"{path}: config must be a JSON object")

    config = ServiceConfig()
    base_dir = os.path.dirname(os.path.abspath(path))

    if "publishers" in raw:
        config.publishers = parse_publishers(raw["publishers"])
    elif "publishers_file" in raw:
        config.publishers = load_publishers(
            os.path.join(base_dir, raw["publishers_file"])
        )

    for name in (
        "poll_interval_seconds",
        "max_requests_per_hour",
        "retention_days",
        "bind_port",
    ):
        if name in raw:
            value = raw[name]
            if not isinstance(value, int) or isinstance(value, bool) or value <= 0:
                raise ConfigError(f"{name} must be a positive integer, got {value!r}")
            setattr(config, name, value)
    if config.retention_days < MIN_RETENTION_DAYS:
        raise ConfigError(
            f"retention_days must be >= {MIN_RETENTION_DAYS}, "
            f"got {config.retention_days}"
        )

    for name in ("store_path", "fixture_dir", "static_dir"):
        if name in raw and raw[name] is not None:
            setattr(config, name, os.path.join(base_dir, str(raw[name])))
    if "bind_host" in raw:
        config.bind_host = str(raw["bind_host"])

    if "timezone" in raw:
        config.timezone = str(raw["timezone"])
    try:
        ZoneInfo(config.timezone)
    except (ZoneInfoNotFoundError, ValueError):
        raise ConfigError(f"unknown timezone {config.timezone!r}") from None

    if "cutoff_local_time" in raw:
        config.cutoff_local_time = _parse_cutoff(str(raw["cutoff_local_time"]))

    return config
