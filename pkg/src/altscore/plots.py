"""Figures written next to the delimited reports."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

STYLE = {
    "font.size": 9,
    "axes.labelsize": 9,
    "axes.titlesize": 10,
    "legend.fontsize": 8,
    "xtick.labelsize": 8,
    "ytick.labelsize": 8,
    "axes.spines.top": False,
    "axes.spines.right": False,
    "savefig.dpi": 150,
    "svg.hashsalt": "altscore",
}


def _figure(width=5.0, ratio=0.62):
    return plt.subplots(figsize=(width, width * ratio))


def _save(fig, path):
    fig.tight_layout()
    meta = {"Software": None} if str(path).endswith(".png") else None
    fig.savefig(path, metadata=meta)
    plt.close(fig)
    return path


def plot_stage_ladder(labels, wers_by_system, path):
    """WER per cumulative scoring stage, one line per system."""
    with plt.rc_context(STYLE):
        fig, ax = _figure(6.0)
        x = range(len(labels))
        for system, wers in wers_by_system.items():
            ax.plot(x, wers, marker="o", label=system)
        ax.set_xticks(list(x))
        ax.set_xticklabels([l.lstrip("+ ") for l in labels], rotation=30, ha="right")
        ax.set_ylabel("WER (%)")
        ax.set_ylim(bottom=0)
        ax.legend(frameon=False)
        return _save(fig, path)


def plot_system_metrics(rows, path):
    """Grouped precision / recall bars per system; rows are metric dicts."""
    with plt.rc_context(STYLE):
        fig, ax = _figure()
        names = [r["system"] for r in rows]
        x = range(len(names))
        ax.bar([i - 0.2 for i in x], [float(r["precision"]) for r in rows], 0.4, label="precision")
        ax.bar([i + 0.2 for i in x], [float(r["recall"]) for r in rows], 0.4, label="recall")
        ax.set_xticks(list(x))
        ax.set_xticklabels(names, rotation=20, ha="right")
        ax.set_ylim(0, 1.05)
        ax.legend(frameon=False, loc="lower right")
        return _save(fig, path)


def plot_oracle_curves(curves, path):
    """Oracle WER against requested depth N for each alternatives level.

    ``curves`` maps a label to a list of CurveRow; unlimited depth is drawn
    one decade past the largest finite N.
    """
    finite = [r.n for rows in curves.values() for r in rows if r.n is not None]
    top = max(finite, default=1)
    inf_x = top * 10 if top > 1 else 10
    with plt.rc_context(STYLE):
        fig, ax = _figure()
        for label, rows in curves.items():
            xs = [inf_x if r.n is None else r.n for r in rows]
            ys = [r.wer for r in rows]
            ax.plot(xs, ys, marker="o", label=label)
        ax.set_xscale("log")
        ticks = sorted({inf_x if r.n is None else r.n for rows in curves.values() for r in rows})
        ax.set_xticks(ticks)
        ax.set_xticklabels(["inf" if t == inf_x and any(r.n is None for rs in curves.values() for r in rs)
                            else str(t) for t in ticks])
        ax.set_xlabel("requested depth N")
        ax.set_ylabel("oracle WER (%)")
        ax.set_ylim(bottom=0)
        ax.legend(frameon=False)
        return _save(fig, path)
