"""Command-line interface.

Curation pipeline (offline, file to file):
    feedgrid expand-hashtags | count-urls | consensus | classify | select

Service operations:
    feedgrid poll | serve | report | export | load | prune
"""

from __future__ import annotations

import argparse
import json
import logging
import sys

from . import curation, ingest, ranking, report
from .api import GRID_K, TOP10_K, TOP_METRIC, create_app
from .config import ServiceConfig, load_config
from .records import parse_timestamp, read_record_file
from .store import PostStore

log = logging.getLogger(__name__)


def _read_lines(path: str) -> list[str]:
    with open(path, "r", encoding="utf-8") as fp:
        return [line.strip() for line in fp if line.strip()]


def _open_store(config: ServiceConfig) -> PostStore:
    return PostStore(config.store_path, retention_days=config.retention_days)


def _now_arg(value: str | None) -> int:
    import time

    return parse_timestamp(value) if value else int(time.time())


# -- curation subcommands ---------------------------------------------------


def cmd_expand_hashtags(args: argparse.Namespace) -> int:
    seeds = frozenset(curation.normalize_hashtag(s) for s in _read_lines(args.seeds))
    corpus = curation.read_tweet_corpus(args.corpus)
    expanded = curation.expand_hashtags(
        seeds, corpus, min_cooccurrence=args.min_cooccurrence, rounds=args.rounds
    )
    with open(args.out, "w", encoding="utf-8") as fp:
        for tag in sorted(expanded):
            fp.write(tag + "\n")
    print(f"{len(expanded)} hashtags ({len(expanded) - len(seeds)} added)")
    return 0


def cmd_count_urls(args: argparse.Namespace) -> int:
    corpus = curation.read_tweet_corpus(args.corpus)
    result = curation.extract_base_urls(corpus)
    ordered = sorted(result.counts.items(), key=lambda kv: (-kv[1], kv[0]))
    with open(args.out, "w", encoding="utf-8") as fp:
        fp.write("base_url\tcount\n")
        for host, count in ordered:
            fp.write(f"{host}\t{count}\n")
    print(f"{len(ordered)} base URLs, {result.skipped} skipped", file=sys.stderr)
    return 0


def cmd_consensus(args: argparse.Namespace) -> int:
    rows = curation.read_ledger(args.ledger)
    updated = [curation.apply_consensus(row) for row in rows]
    with open(args.out, "w", encoding="utf-8") as fp:
        curation.write_ledger(updated, fp)
    needs_review = sum(
        1
        for row in updated
        if row["consensus_status"] == curation.CONSENSUS_NEEDS_REVIEW
    )
    print(f"{len(updated)} sites, {needs_review} need review")
    return 0


def cmd_classify(args: argparse.Namespace) -> int:
    rows = curation.read_ledger(args.ledger)
    updated = [curation.apply_classification(row) for row in rows]
    with open(args.out, "w", encoding="utf-8") as fp:
        curation.write_ledger(updated, fp)
    junk = sum(1 for row in updated if row["classification"] == "junk")
    print(f"{len(updated)} sites, {junk} classified junk")
    return 0


def cmd_select(args: argparse.Namespace) -> int:
    rows = curation.read_ledger(args.ledger)
    sites = [curation.site_from_row(row) for row in rows]
    tracked = curation.select_tracked(sites, args.n)
    publishers = curation.publishers_from_sites(tracked)
    with open(args.out, "w", encoding="utf-8") as fp:
        json.dump(publishers, fp, ensure_ascii=False, indent=2)
        fp.write("\n")
    print(f"{len(publishers)} pages selected")
    return 0


# -- service subcommands ----------------------------------------------------


def cmd_poll(args: argparse.Namespace) -> int:
    config = load_config(args.config)
    if config.fixture_dir is None:
        print("config has no fixture_dir; nothing to poll", file=sys.stderr)
        return 2
    connector = ingest.FixtureConnector(
        config.fixture_dir, max_requests_per_hour=config.max_requests_per_hour
    )
    with _open_store(config) as store:
        result = ingest.poll_once(
            connector, config.page_ids, store, now=_now_arg(args.now)
        )
    print(
        f"polled {result.pages_polled} pages: {result.posts_new} new, "
        f"{result.posts_skipped_duplicate} duplicate, "
        f"{result.requests_used} requests"
    )
    for page_id, reason in result.errors:
        print(f"error {page_id}: {reason}", file=sys.stderr)
    return 0 if not result.errors else 1


def cmd_watch(args: argparse.Namespace) -> int:
    config = load_config(args.config)
    if config.fixture_dir is None:
        print("config has no fixture_dir; nothing to poll", file=sys.stderr)
        return 2
    connector = ingest.FixtureConnector(
        config.fixture_dir, max_requests_per_hour=config.max_requests_per_hour
    )
    with _open_store(config) as store:
        ingest.run_scheduler(
            connector,
            config.page_ids,
            store,
            clock=ingest.SystemClock(),
            interval=config.poll_interval_seconds,
        )
    return 0


def cmd_serve(args: argparse.Namespace) -> int:
    import uvicorn

    config = load_config(args.config)
    store = _open_store(config)
    app = create_app(
        store,
        config.publishers,
        tz=config.timezone,
        cutoff_local_time=config.cutoff_local_time,
        static_dir=config.static_dir,
    )
    uvicorn.run(app, host=config.bind_host, port=args.port or config.bind_port)
    return 0


def cmd_report(args: argparse.Namespace) -> int:
    config = load_config(args.config)
    now = _now_arg(args.now)
    window = ranking.current_daily_window(
        now, tz=config.timezone, cutoff_local_time=config.cutoff_local_time
    )
    with _open_store(config) as store:
        posts = store.posts_in_interval(window.start, window.cutoff_time)
    grid_view = ranking.top_k(posts, window, GRID_K, TOP_METRIC)
    top10_view = ranking.top_k(posts, window, TOP10_K, TOP_METRIC)
    paths = report.write_daily_reports(
        grid_view, top10_view, config.publishers, args.out_dir
    )
    for name, path in sorted(paths.items()):
        print(f"{name}: {path}")
    return 0


def cmd_export(args: argparse.Namespace) -> int:
    config = load_config(args.config)
    with _open_store(config) as store:
        if args.out == "-":
            count = store.export(sys.stdout)
        else:
            with open(args.out, "w", encoding="utf-8") as fp:
                count = store.export(fp)
    print(f"{count} posts exported", file=sys.stderr)
    return 0


def cmd_load(args: argparse.Namespace) -> int:
    config = load_config(args.config)
    records = read_record_file(args.records)
    with _open_store(config) as store:
        inserted = store.load_records(records)
    print(f"{inserted} posts loaded ({len(records) - inserted} duplicates)")
    return 0


def cmd_prune(args: argparse.Namespace) -> int:
    config = load_config(args.config)
    with _open_store(config) as store:
        removed = store.prune(config.retention_days, now=_now_arg(args.now))
    print(f"{removed} posts pruned")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="feedgrid",
        description="Publisher-post aggregation, ranking, and source curation",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("expand-hashtags", help="grow a seed hashtag set by co-occurrence")
    p.add_argument("--seeds", required=True, help="seed hashtags, one per line")
    p.add_argument("--corpus", required=True, help="tweet corpus (JSON Lines)")
    p.add_argument("--min-cooccurrence", type=int, default=1)
    p.add_argument("--rounds", type=int, default=1)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_expand_hashtags)

    p = sub.add_parser("count-urls", help="count mentions per base URL")
    p.add_argument("--corpus", required=True)
    p.add_argument("--out", required=True, help="TSV output, most-mentioned first")
    p.set_defaults(func=cmd_count_urls)

    p = sub.add_parser("consensus", help="resolve triple-coded labels")
    p.add_argument("--ledger", required=True, help="site ledger (JSON Lines)")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_consensus)

    p = sub.add_parser("classify", help="apply the junk classification rule")
    p.add_argument("--ledger", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("select", help="pick the top-N tracked pages")
    p.add_argument("--ledger", required=True)
    p.add_argument("-n", type=int, default=50)
    p.add_argument("--out", required=True, help="publishers JSON for the service config")
    p.set_defaults(func=cmd_select)

    p = sub.add_parser("poll", help="run one poll against the configured connector")
    p.add_argument("--config", required=True)
    p.add_argument("--now", help="poll timestamp (ISO-8601), defaults to wall clock")
    p.set_defaults(func=cmd_poll)

    p = sub.add_parser("watch", help="poll on schedule, once per interval boundary")
    p.add_argument("--config", required=True)
    p.set_defaults(func=cmd_watch)

    p = sub.add_parser("serve", help="serve the query API (and static UI if configured)")
    p.add_argument("--config", required=True)
    p.add_argument("--port", type=int, default=None)
    p.set_defaults(func=cmd_serve)

    p = sub.add_parser("report", help="render daily grid/top10 figures and TSVs")
    p.add_argument("--config", required=True)
    p.add_argument("--out-dir", required=True)
    p.add_argument("--now", help="report timestamp (ISO-8601), defaults to wall clock")
    p.set_defaults(func=cmd_report)

    p = sub.add_parser("export", help="dump the store in record serialization")
    p.add_argument("--config", required=True)
    p.add_argument("--out", default="-", help="output path, `-` for stdout")
    p.set_defaults(func=cmd_export)

    p = sub.add_parser("load", help="seed the store from exported records")
    p.add_argument("--config", required=True)
    p.add_argument("records")
    p.set_defaults(func=cmd_load)

    p = sub.add_parser("prune", help="drop posts older than the retention window")
    p.add_argument("--config", required=True)
    p.add_argument("--now", help="prune timestamp (ISO-8601), defaults to wall clock")
    p.set_defaults(func=cmd_prune)

    return parser


def main(argv: list[str] | None = None) -> int:
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(name)s: %(message)s")
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
