"""Source curation: from hashtag seeds to the tracked-publisher list.

The pipeline runs offline over tweet corpora and an annotated site
ledger, in five steps, each exposed as a CLI subcommand:

1. expand-hashtags — grow a seed hashtag set with co-occurring hashtags
   (snowball sampling over the corpus).
2. count-urls — reduce every mentioned URL to its base site and count
   total mentions.
3. consensus — resolve three independent coder labelings per site into
   a final criteria set, escalating disagreements.
4. classify — apply the junk-news rule to the final criteria.
5. select — keep verified junk sites, order by Twitter share count, and
   emit the tracked-pages config the ingestion service consumes.

A site is classified as junk news when it satisfies at least three
qualifying criteria dimensions.  The dimensions are Professionalism,
Style, Credibility, Bias (left/right/unspecified collapse into one),
Counterfeit, and being an aggregator of other junk sources.  Bias
specializations never double-count: a site tagged both LB and RB still
satisfies only the one Bias dimension.
"""

from __future__ import annotations

import json
from collections import Counter
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Sequence
from urllib.parse import urlsplit


class CriterionTag(str, Enum):
    """Criteria tokens as written in annotation files."""

    PROFESSIONALISM = "P"
    STYLE = "S"
    CREDIBILITY = "Cr"
    BIAS = "B"
    LEFT_BIAS = "LB"
    RIGHT_BIAS = "RB"
    COUNTERFEIT = "Ct"
    JUNK_AGGREGATOR = "JN_AGGR"


#: Bias and its two specializations count as a single dimension.
_BIAS_TAGS = frozenset(
    {CriterionTag.BIAS, CriterionTag.LEFT_BIAS, CriterionTag.RIGHT_BIAS}
)

JUNK_DIMENSION_THRESHOLD = 3

_TAG_ALIASES = {
    "p": CriterionTag.PROFESSIONALISM,
    "s": CriterionTag.STYLE,
    "cr": CriterionTag.CREDIBILITY,
    "b": CriterionTag.BIAS,
    "lb": CriterionTag.LEFT_BIAS,
    "rb": CriterionTag.RIGHT_BIAS,
    "ct": CriterionTag.COUNTERFEIT,
    # Hand-entered ledgers abbreviate the aggregator tag inconsistently.
    "jn_aggr": CriterionTag.JUNK_AGGREGATOR,
    "jn_agg": CriterionTag.JUNK_AGGREGATOR,
    "jnaggr": CriterionTag.JUNK_AGGREGATOR,
}


def parse_criterion(token: str) -> CriterionTag:
    """Parse one criterion token, tolerating case and spacing variants."""
    normalized = token.strip().replace(" ", "_").casefold()
    try:
        return _TAG_ALIASES[normalized]
    except KeyError:
        raise ValueError(f"unknown criterion tag {token!r}") from None


def parse_criteria(tokens: Iterable[str]) -> frozenset[CriterionTag]:
    return frozenset(parse_criterion(t) for t in tokens)


def qualifying_dimensions(criteria: frozenset[CriterionTag]) -> int:
    """Number of distinct criteria dimensions a tag set satisfies."""
    dimensions = set()
    for tag in criteria:
        dimensions.add(CriterionTag.BIAS if tag in _BIAS_TAGS else tag)
    return len(dimensions)


def classify_source(criteria: frozenset[CriterionTag]) -> str:
    """``junk`` when at least three qualifying dimensions are satisfied."""
    if qualifying_dimensions(criteria) >= JUNK_DIMENSION_THRESHOLD:
        return "junk"
    return "not-junk"


CONSENSUS_AGREED = "agreed"
CONSENSUS_EXECUTIVE = "executive-decided"
CONSENSUS_NEEDS_REVIEW = "needs-review"


def consensus(
    labels: Sequence[frozenset[CriterionTag]],
    override: frozenset[CriterionTag] | None = None,
) -> tuple[frozenset[CriterionTag], str]:
    """Resolve triple-coded labels into one final criteria set.

    Unanimity wins outright; a disagreement falls to the executive
    override when one is recorded, and otherwise escalates (empty set,
    needs-review).  The final set is never invented: it is one of the
    coder sets or the override, verbatim.
    """
    if len(labels) != 3:
        raise ValueError(f"expected exactly three coder label sets, got {len(labels)}")
    first = labels[0]
    if all(label == first for label in labels[1:]):
        return first, CONSENSUS_AGREED
    if override is not None:
        return override, CONSENSUS_EXECUTIVE
    return frozenset(), CONSENSUS_NEEDS_REVIEW


def verify_page_link(site_declares_page: bool, page_declares_site: bool) -> bool:
    """A page belongs to a site when either side declares the other."""
    return site_declares_page or page_declares_site


@dataclass(frozen=True)
class TweetRecord:
    """One tweet reduced to the fields the pipeline needs."""

    tweet_id: str
    text: str
    hashtags: frozenset[str]
    urls: tuple[str, ...]

    @classmethod
    def from_obj(cls, obj: dict) -> TweetRecord:
        return cls(
            tweet_id=str(obj["tweet_id"]),
            text=obj.get("text", ""),
            hashtags=frozenset(normalize_hashtag(h) for h in obj.get("hashtags", ())),
            urls=tuple(obj.get("urls", ())),
        )


def normalize_hashtag(tag: str) -> str:
    return tag.strip().lstrip("#").casefold()


def read_tweet_corpus(path: str) -> list[TweetRecord]:
    """JSON Lines, one tweet per line: tweet_id, text, hashtags, urls."""
    tweets = []
    with open(path, "r", encoding="utf-8") as fp:
        for line_no, line in enumerate(fp, start=1):
            stripped = line.strip()
            if not stripped:
                continue
            try:
                obj = json.loads(stripped)
                tweets.append(TweetRecord.from_obj(obj))
            except (json.JSONDecodeError, KeyError, TypeError) as exc:
                raise ValueError(f"{path}:{line_no}: bad tweet record: {exc}") from None
    return tweets


def expand_hashtags(
    seeds: frozenset[str],
    corpus: Iterable[TweetRecord],
    min_cooccurrence: int = 1,
    rounds: int = 1,
) -> frozenset[str]:
    """Seeds plus hashtags co-occurring with a seed in enough tweets.

    A candidate qualifies when it appears in at least
    ``min_cooccurrence`` tweets that also mention a current seed.  Each
    round feeds the expanded set back in as the new seeds.
    """
    if not seeds:
        raise ValueError("seeds must be non-empty")
    if min_cooccurrence < 1:
        raise ValueError("min_cooccurrence must be >= 1")
    if rounds < 1:
        raise ValueError("rounds must be >= 1")

    tweets = list(corpus)
    current = frozenset(normalize_hashtag(s) for s in seeds)
    for _ in range(rounds):
        cooccurrence: Counter[str] = Counter()
        for tweet in tweets:
            if not (tweet.hashtags & current):
                continue
            for tag in tweet.hashtags - current:
                cooccurrence[tag] += 1
        added = {tag for tag, n in cooccurrence.items() if n >= min_cooccurrence}
        if not added:
            break
        current = current | added
    return current


@dataclass
class UrlCountResult:
    counts: Counter[str] = field(default_factory=Counter)
    skipped: int = 0


def base_url(raw: str) -> str | None:
    """Reduce a URL to its site: lowercase host, no www., no path/query.

    Returns None for anything without a recognizable hostname.
    Scheme-less strings like ``example.com/page`` are tolerated since
    tweet-extracted URLs often arrive that way.
    """
    text = raw.strip()
    if not text:
        return None
    candidate = text if "://" in text else "//" + text
    try:
        host = urlsplit(candidate).hostname
    except ValueError:
        return None
    if not host:
        return None
    if host.startswith("www."):
        host = host[len("www.") :]
    if "." not in host or host.startswith(".") or host.endswith("."):
        return None
    allowed = set("abcdefghijklmnopqrstuvwxyz0123456789.-")
    if not set(host) <= allowed:
        return None
    return host


def extract_base_urls(corpus: Iterable[TweetRecord]) -> UrlCountResult:
    """Count total mentions per base URL; a URL mentioned twice in one
    tweet counts twice.  Unparseable URLs are skipped and tallied."""
    result = UrlCountResult()
    for tweet in corpus:
        for raw in tweet.urls:
            host = base_url(raw)
            if host is None:
                result.skipped += 1
            else:
                result.counts[host] += 1
    return result


@dataclass(frozen=True)
class SourceSite:
    """A candidate website moving through the curation pipeline.

    ``classification`` is derived, never hand-set: junk requires at
    least three qualifying dimensions in the final criteria, and a
    recorded Facebook page id requires at least one verification flag.
    """

    base_url: str
    twitter_share_count: int
    coder_labels: tuple[frozenset[CriterionTag], ...]
    final_criteria: frozenset[CriterionTag]
    classification: str
    facebook_page_id: str | None = None
    site_lists_page: bool = False
    page_lists_site: bool = False
    page_name: str | None = None

    def __post_init__(self) -> None:
        if self.twitter_share_count < 0:
            raise ValueError(f"{self.base_url}: twitter_share_count must be >= 0")
        if self.classification not in ("junk", "not-junk", "needs-review"):
            raise ValueError(
                f"{self.base_url}: bad classification {self.classification!r}"
            )
        if self.classification == "junk" and (
            qualifying_dimensions(self.final_criteria) < JUNK_DIMENSION_THRESHOLD
        ):
            raise ValueError(
                f"{self.base_url}: classified junk with fewer than "
                f"{JUNK_DIMENSION_THRESHOLD} qualifying dimensions"
            )
        if self.facebook_page_id is not None and not verify_page_link(
            self.site_lists_page, self.page_lists_site
        ):
            raise ValueError(
                f"{self.base_url}: facebook_page_id recorded without verification"
            )

    @property
    def has_verified_page(self) -> bool:
        return self.facebook_page_id is not None


def select_tracked(sites: Iterable[SourceSite], n: int) -> list[SourceSite]:
    """Verified junk sites ordered by Twitter share count, truncated to n.

    Ties order alphabetically by base_url, so the selection is a pure
    function of its input.
    """
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    eligible = [s for s in sites if s.classification == "junk" and s.has_verified_page]
    eligible.sort(key=lambda s: (-s.twitter_share_count, s.base_url))
    return eligible[:n]


# ---------------------------------------------------------------------------
# Site ledger files
#
# The ledger is JSON Lines, one site per line, accreting fields as it moves
# through the pipeline:
#
#   input:           base_url, twitter_share_count, coder_labels (three
#                    arrays of tags), optional override, optional page
#                    {facebook_page_id, site_lists_page, page_lists_site},
#                    optional page_name
#   after consensus: + final_criteria, consensus_status
#   after classify:  + classification
# ---------------------------------------------------------------------------


def read_ledger(path: str) -> list[dict]:
    rows = []
    with open(path, "r", encoding="utf-8") as fp:
        for line_no, line in enumerate(fp, start=1):
            stripped = line.strip()
            if not stripped:
                continue
            try:
                row = json.loads(stripped)
            except json.JSONDecodeError as exc:
                raise ValueError(f"{path}:{line_no}: invalid JSON: {exc}") from None
            if not isinstance(row, dict) or "base_url" not in row:
                raise ValueError(f"{path}:{line_no}: ledger row needs base_url")
            rows.append(row)
    return rows


def write_ledger(rows: Iterable[dict], fp) -> int:
    count = 0
    for row in rows:
        fp.write(json.dumps(row, ensure_ascii=False, separators=(",", ":")))
        fp.write("\n")
        count += 1
    return count


def _tags_to_tokens(tags: frozenset[CriterionTag]) -> list[str]:
    return sorted(tag.value for tag in tags)


def apply_consensus(row: dict) -> dict:
    """Fill final_criteria and consensus_status from the coder labels."""
    labels_raw = row.get("coder_labels")
    if not isinstance(labels_raw, list) or len(labels_raw) != 3:
        raise ValueError(
            f"{row.get('base_url', '?')}: coder_labels must hold three label sets"
        )
    labels = [parse_criteria(tags) for tags in labels_raw]
    override_raw = row.get("override")
    override = parse_criteria(override_raw) if override_raw is not None else None
    final, status = consensus(labels, override)
    updated = dict(row)
    updated["final_criteria"] = _tags_to_tokens(final)
    updated["consensus_status"] = status
    return updated


def apply_classification(row: dict) -> dict:
    """Fill classification from the final criteria (after consensus)."""
    if "final_criteria" not in row or "consensus_status" not in row:
        raise ValueError(
            f"{row.get('base_url', '?')}: run consensus before classify"
        )
    updated = dict(row)
    if row["consensus_status"] == CONSENSUS_NEEDS_REVIEW:
        updated["classification"] = "needs-review"
    else:
        updated["classification"] = classify_source(parse_criteria(row["final_criteria"]))
    return updated


def site_from_row(row: dict) -> SourceSite:
    """Materialize a fully classified ledger row; validates invariants."""
    if "classification" not in row:
        raise ValueError(f"{row.get('base_url', '?')}: run classify before select")
    page = row.get("page") or {}
    return SourceSite(
        base_url=row["base_url"],
        twitter_share_count=int(row.get("twitter_share_count", 0)),
        coder_labels=tuple(parse_criteria(tags) for tags in row.get("coder_labels", [])),
        final_criteria=parse_criteria(row.get("final_criteria", [])),
        classification=row["classification"],
        facebook_page_id=page.get("facebook_page_id"),
        site_lists_page=bool(page.get("site_lists_page", False)),
        page_lists_site=bool(page.get("page_lists_site", False)),
        page_name=row.get("page_name"),
    )


def publishers_from_sites(sites: Iterable[SourceSite]) -> list[dict]:
    """Tracked-pages entries in selection order, as consumed by ingestion."""
    publishers = []
    for site in sites:
        if site.facebook_page_id is None:
            raise ValueError(f"{site.base_url}: selected site has no page id")
        publishers.append(
            {
                "page_id": site.facebook_page_id,
                "page_name": site.page_name or site.base_url,
                "site_base_url": site.base_url,
            }
        )
    return publishers
