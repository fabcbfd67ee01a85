"""File-based daily reports: ranked-view figures plus TSV alongside.

The service's daily views (Visual Grid, Top-10) can be archived as
files: a rendered PNG for eyeballing and a tab-separated table carrying
the same entries for downstream tooling.  Cells in the grid figure are
placeholders — color encodes the age-adjusted total, the label names
the page — since fetching remote images is out of scope; the TSV keeps
the image URLs.
"""

from __future__ import annotations

import math
import os
import warnings
from contextlib import contextmanager
from typing import IO

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402 - backend must be set first

from .config import Publisher
from .domain import format_decimal
from .ranking import RankedView
from .records import format_timestamp

GRID_SIDE = 16

TSV_COLUMNS = (
    "rank",
    "post_id",
    "page_id",
    "page_name",
    "posted_at",
    "value",
    "image_url",
    "permalink",
)


def write_entries_tsv(view: RankedView, publishers: list[Publisher], fp: IO[str]) -> int:
    """Ranked entries as TSV, best first.  Returns rows written."""
    names = {p.page_id: p.page_name for p in publishers}
    fp.write("\t".join(TSV_COLUMNS) + "\n")
    for rank, entry in enumerate(view.entries, start=1):
        post = entry.post
        row = (
            str(rank),
            post.post_id,
            post.page_id,
            names.get(post.page_id, post.page_id),
            format_timestamp(post.posted_at),
            format_decimal(entry.value),
            post.image_url or "",
            post.permalink,
        )
        fp.write("\t".join(_tsv_escape(cell) for cell in row) + "\n")
    return len(view.entries)


def _tsv_escape(cell: str) -> str:
    return cell.replace("\t", " ").replace("\n", " ").replace("\r", " ")


@contextmanager
def _tolerate_missing_glyphs():
    # page names in arbitrary scripts may fall outside the bundled font;
    # the substitution box is fine, the warning spam is not
    with warnings.catch_warnings():
        warnings.filterwarnings("ignore", message=r"Glyph \d+ .* missing from font")
        yield


def render_grid_figure(
    view: RankedView, publishers: list[Publisher], out_path: str
) -> None:
    """16x16 grid of rank-ordered cells, shaded by metric value."""
    names = {p.page_id: p.page_name for p in publishers}
    values = [float(e.value) for e in view.entries]
    top = max(values) if values else 1.0
    cmap = plt.get_cmap("YlOrRd")

    fig, axes = plt.subplots(GRID_SIDE, GRID_SIDE, figsize=(16, 16))
    for index in range(GRID_SIDE * GRID_SIDE):
        ax = axes[index // GRID_SIDE][index % GRID_SIDE]
        ax.set_xticks([])
        ax.set_yticks([])
        if index >= len(view.entries):
            ax.set_facecolor("#f0f0f0")
            for spine in ax.spines.values():
                spine.set_visible(False)
            continue
        entry = view.entries[index]
        # log-ish shading so one runaway post does not wash out the rest
        share = math.log1p(float(entry.value)) / math.log1p(top) if top > 0 else 0.0
        ax.set_facecolor(cmap(0.15 + 0.8 * share))
        label = names.get(entry.post.page_id, entry.post.page_id)
        ax.text(
            0.5,
            0.5,
            f"#{index + 1}\n{label[:14]}",
            ha="center",
            va="center",
            fontsize=6,
            transform=ax.transAxes,
        )
    fig.suptitle(
        f"Daily grid — window ending {format_timestamp(view.window.cutoff_time)}",
        fontsize=14,
    )
    fig.subplots_adjust(wspace=0.05, hspace=0.05)
    with _tolerate_missing_glyphs():
        fig.savefig(out_path, dpi=100)
    plt.close(fig)


def render_top10_figure(
    view: RankedView, publishers: list[Publisher], out_path: str
) -> None:
    """Horizontal bars of the day's top posts by age-adjusted total."""
    names = {p.page_id: p.page_name for p in publishers}
    labels = []
    values = []
    for rank, entry in enumerate(view.entries, start=1):
        page = names.get(entry.post.page_id, entry.post.page_id)
        labels.append(f"{rank}. {page}")
        values.append(float(entry.value))

    fig, ax = plt.subplots(figsize=(10, 6))
    positions = range(len(labels) - 1, -1, -1)
    ax.barh(list(positions), values, color="#c0392b")
    ax.set_yticks(list(positions))
    ax.set_yticklabels(labels, fontsize=9)
    ax.set_xlabel("engagements per second of post life")
    ax.set_title(
        f"Daily top-{len(labels) or 10} — window ending "
        f"{format_timestamp(view.window.cutoff_time)}"
    )
    with _tolerate_missing_glyphs():
        fig.tight_layout()
        fig.savefig(out_path, dpi=100)
    plt.close(fig)


def write_daily_reports(
    grid_view: RankedView,
    top10_view: RankedView,
    publishers: list[Publisher],
    out_dir: str,
) -> dict[str, str]:
    """Render grid and top-10 PNGs with TSVs alongside; returns the paths."""
    os.makedirs(out_dir, exist_ok=True)
    paths = {
        "grid_png": os.path.join(out_dir, "grid.png"),
        "grid_tsv": os.path.join(out_dir, "grid.tsv"),
        "top10_png": os.path.join(out_dir, "top10.png"),
        "top10_tsv": os.path.join(out_dir, "top10.tsv"),
    }
    render_grid_figure(grid_view, publishers, paths["grid_png"])
    with open(paths["grid_tsv"], "w", encoding="utf-8") as fp:
        write_entries_tsv(grid_view, publishers, fp)
    render_top10_figure(top10_view, publishers, paths["top10_png"])
    with open(paths["top10_tsv"], "w", encoding="utf-8") as fp:
        write_entries_tsv(top10_view, publishers, fp)
    return paths
