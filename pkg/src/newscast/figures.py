"""Matplotlib rendering for report commands.

Every report CSV gets a PNG sibling.  Figures are drawn through the
object-oriented Agg API (no pyplot global state) and saved without the
Software metadata chunk, so re-running a command yields byte-identical
images.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np
from matplotlib.backends.backend_agg import FigureCanvasAgg
from matplotlib.figure import Figure

_DPI = 110


def _new_figure(width: float = 8.0, height: float = 4.5) -> Figure:
    fig = Figure(figsize=(width, height), dpi=_DPI)
    FigureCanvasAgg(fig)
    return fig


def _save(fig: Figure, out_path) -> Path:
    out = Path(out_path)
    fig.savefig(out, format="png", metadata={"Software": None})
    return out


def save_panel_figure(panel, out_path, topics=None) -> Path:
    """Daily topic-volume lines, one per topic."""
    fig = _new_figure()
    ax = fig.add_subplot(111)
    chosen = panel.topics if topics is None else list(topics)
    for u in chosen:
        ax.plot(panel.dates, panel.values[panel.topics.index(u)],
                label=f"topic {u}", linewidth=1.0)
    ax.set_xlabel("date")
    ax.set_ylabel("daily visits")
    ax.set_title("topic volume")
    if len(chosen) <= 12:
        ax.legend(fontsize=7, ncol=2)
    fig.autofmt_xdate()
    fig.tight_layout()
    return _save(fig, out_path)


def save_backtest_figure(report, out_path) -> Path:
    """Mean MAPE against horizon, one line per topic plus the mean."""
    fig = _new_figure()
    ax = fig.add_subplot(111)
    horizons = sorted({c.horizon for c in report.cells})
    topics = sorted({c.topic for c in report.cells})
    grid = {(c.topic, c.horizon): c.mape for c in report.cells}
    for u in topics:
        ax.plot(horizons, [grid[(u, h)] for h in horizons],
                linewidth=0.8, alpha=0.5, label=f"topic {u}")
    by_h = report.by_horizon()
    ax.plot(horizons, [by_h[h] for h in horizons], "ko-", linewidth=2.0,
            label="mean")
    ax.set_xlabel("horizon (days)")
    ax.set_ylabel("MAPE (%)")
    ax.set_title(f"{report.kind.value} backtest, window {report.window_days}d")
    if len(topics) <= 10:
        ax.legend(fontsize=7)
    fig.tight_layout()
    return _save(fig, out_path)


def save_kselection_figure(report, out_path) -> Path:
    """Macro P/R/F1 of the topic-label classifier per candidate k."""
    fig = _new_figure()
    ax = fig.add_subplot(111)
    ks = [r.k for r in report.rows]
    for attr, style in (("precision", "s--"), ("recall", "^--"), ("f1", "o-")):
        ax.plot(ks, [getattr(r, attr) for r in report.rows], style, label=attr)
    ax.axvline(report.chosen_k, color="grey", linewidth=0.8, linestyle=":")
    ax.set_xlabel("number of topics k")
    ax.set_ylabel("score")
    ax.set_title(f"k selection (chosen k={report.chosen_k})")
    ax.legend()
    fig.tight_layout()
    return _save(fig, out_path)


def save_evaluation_figure(rows, out_path) -> Path:
    """Test MAPE per predictor variant."""
    fig = _new_figure()
    ax = fig.add_subplot(111)
    labels = [r.variant for r in rows]
    ax.bar(range(len(rows)), [r.mape for r in rows], color="steelblue")
    ax.set_xticks(range(len(rows)))
    ax.set_xticklabels(labels, rotation=20, ha="right", fontsize=8)
    ax.set_ylabel("test MAPE (%)")
    ax.set_title("article predictors")
    fig.tight_layout()
    return _save(fig, out_path)


def save_ccdf_figure(report, out_path) -> Path:
    """Log-log CCDF of 30-day visits per article kind."""
    fig = _new_figure(6.0, 4.5)
    ax = fig.add_subplot(111)
    for kind in sorted(report.ccdf):
        xs, ps = report.ccdf[kind]
        ax.loglog(np.maximum(xs, 1.0), ps, drawstyle="steps-post", label=kind)
    ax.set_xlabel("30-day visits")
    ax.set_ylabel("P(X >= x)")
    ax.set_title("popularity CCDF")
    ax.legend()
    fig.tight_layout()
    return _save(fig, out_path)


def save_growth_figure(report, out_path) -> Path:
    """Mean normalized cumulative-visit curves per kind."""
    fig = _new_figure(6.0, 4.5)
    ax = fig.add_subplot(111)
    days = np.arange(report.growth_days + 1)
    for kind in sorted(report.growth):
        ax.plot(days, report.growth[kind], label=kind)
    ax.set_xlabel("days since publication")
    ax.set_ylabel("mean normalized visits")
    ax.set_title("growth curves")
    ax.legend()
    fig.tight_layout()
    return _save(fig, out_path)


def save_shelf_life_figure(report, out_path) -> Path:
    """Shelf-life distributions, one panel per horizon."""
    horizons = sorted(report.shelf)
    fig = _new_figure(9.0, 2.6 * ((len(horizons) + 1) // 2))
    for i, h in enumerate(horizons):
        ax = fig.add_subplot((len(horizons) + 1) // 2, 2, i + 1)
        by_kind = report.shelf[h]["by_kind"]
        width = 0.8 / max(len(by_kind), 1)
        for j, kind in enumerate(sorted(by_kind)):
            values = by_kind[kind]
            days = sorted(set(values))
            ax.bar([d + j * width for d in days],
                   [values.count(d) for d in days],
                   width=width, label=kind)
        ax.set_title(f"H={h}d (mean {report.shelf[h]['mean']:.1f}d)", fontsize=9)
        ax.set_xlabel("shelf-life (days)", fontsize=8)
        if i == 0:
            ax.legend(fontsize=7)
    fig.tight_layout()
    return _save(fig, out_path)
