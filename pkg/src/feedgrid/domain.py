"""Core value types and the engagement/age arithmetic shared by every layer.

Posts carry a frozen engagement snapshot taken when they were first
retrieved; all ranking metrics derive from that snapshot and the post's
age at retrieval.  Age-adjusted values are kept as exact rationals
(``fractions.Fraction``) so that ordering is deterministic and never
subject to float rounding; they are rendered as decimal strings only at
the presentation edge (see :func:`format_decimal`).

Timestamps are UTC epoch seconds throughout.  Timezone-sensitive
behavior (the daily cutoff) lives in :mod:`feedgrid.ranking`, not here.
"""

from __future__ import annotations

from dataclasses import dataclass
from decimal import Decimal, localcontext
from enum import Enum
from fractions import Fraction


class MetricBase(str, Enum):
    """The eight per-post reaction counters plus the derived total."""

    LIKE = "like"
    COMMENT = "comment"
    SHARE = "share"
    LOVE = "love"
    HAHA = "haha"
    WOW = "wow"
    SAD = "sad"
    ANGRY = "angry"
    ALL = "all"


#: The eight raw reaction counters, in canonical serialization order.
COUNTER_BASES: tuple[MetricBase, ...] = (
    MetricBase.LIKE,
    MetricBase.COMMENT,
    MetricBase.SHARE,
    MetricBase.LOVE,
    MetricBase.HAHA,
    MetricBase.WOW,
    MetricBase.SAD,
    MetricBase.ANGRY,
)


@dataclass(frozen=True)
class EngagementCounts:
    """Per-post reaction counters.  All eight must be non-negative ints."""

    like: int = 0
    comment: int = 0
    share: int = 0
    love: int = 0
    haha: int = 0
    wow: int = 0
    sad: int = 0
    angry: int = 0

    def __post_init__(self) -> None:
        for base in COUNTER_BASES:
            value = getattr(self, base.value)
            if not isinstance(value, int) or isinstance(value, bool):
                raise ValueError(f"{base.value} must be an integer, got {value!r}")
            if value < 0:
                raise ValueError(f"{base.value} must be >= 0, got {value}")

    @property
    def total(self) -> int:
        """Sum of all eight counters."""
        return (
            self.like
            + self.comment
            + self.share
            + self.love
            + self.haha
            + self.wow
            + self.sad
            + self.angry
        )

    def counter(self, base: MetricBase) -> int:
        """Value of one counter; ``MetricBase.ALL`` yields the total."""
        if base is MetricBase.ALL:
            return self.total
        return getattr(self, base.value)


@dataclass(frozen=True)
class Post:
    """One collected publisher post with its frozen engagement snapshot.

    ``posted_at`` and ``retrieved_at`` are UTC epoch seconds.  The
    snapshot is taken at retrieval time and never updated afterwards;
    ``permalink`` points at the original post so current numbers can be
    checked by hand.
    """

    post_id: str
    page_id: str
    posted_at: int
    retrieved_at: int
    message: str
    link_url: str | None
    image_url: str | None
    permalink: str
    engagement: EngagementCounts

    def __post_init__(self) -> None:
        if not self.post_id:
            raise ValueError("post_id must be non-empty")
        if not self.page_id:
            raise ValueError("page_id must be non-empty")
        if not self.permalink:
            raise ValueError("permalink must be non-empty")
        if self.retrieved_at < self.posted_at:
            raise ValueError(
                f"retrieved_at ({self.retrieved_at}) earlier than "
                f"posted_at ({self.posted_at}) for {self.post_id}"
            )


@dataclass(frozen=True)
class MetricKey:
    """One of the 18 sortable engagement metrics (9 bases x raw/age-adjusted)."""

    base: MetricBase
    age_adjusted: bool = False

    @property
    def token(self) -> str:
        """Wire token, e.g. ``like_raw`` or ``all_adj``."""
        return f"{self.base.value}_{'adj' if self.age_adjusted else 'raw'}"

    @classmethod
    def parse(cls, token: str) -> MetricKey:
        base_name, _, suffix = token.rpartition("_")
        if suffix not in ("raw", "adj"):
            raise ValueError(f"unknown metric token {token!r}")
        try:
            base = MetricBase(base_name)
        except ValueError:
            raise ValueError(f"unknown metric token {token!r}") from None
        return cls(base=base, age_adjusted=(suffix == "adj"))

    @classmethod
    def all_keys(cls) -> tuple[MetricKey, ...]:
        return tuple(
            cls(base=b, age_adjusted=adj) for b in MetricBase for adj in (False, True)
        )


def total_engagement(engagement: EngagementCounts) -> int:
    """Sum of all eight reaction counters."""
    return engagement.total


def post_age_seconds(post: Post) -> int:
    """Age of the post at retrieval time, clamped to a minimum of 1 second.

    The clamp avoids division by zero for posts retrieved in the same
    second they were posted while preserving ordering for all realistic
    ages.
    """
    if post.retrieved_at < post.posted_at:
        raise ValueError(
            f"corrupt post {post.post_id}: retrieved before posted"
        )
    return max(1, post.retrieved_at - post.posted_at)


def metric_value(post: Post, key: MetricKey) -> int | Fraction:
    """Value of one metric for one post.

    Raw metrics are exact integers; age-adjusted metrics are exact
    rationals (counter divided by the clamped age in seconds).
    """
    counter = post.engagement.counter(key.base)
    if not key.age_adjusted:
        return counter
    return Fraction(counter, post_age_seconds(post))


def format_decimal(value: int | Fraction, significant_digits: int = 12) -> str:
    """Render a metric value as a plain decimal string.

    Uses fixed-point notation (never exponents) with at least
    ``significant_digits`` significant digits for non-terminating
    ratios; exact values render exactly.
    """
    if isinstance(value, int):
        return str(value)
    if value.denominator == 1:
        return str(value.numerator)
    with localcontext() as ctx:
        ctx.prec = significant_digits
        quotient = Decimal(value.numerator) / Decimal(value.denominator)
    return format(quotient, "f")
