"""Figure rendering for aggregated bound reports.

One horizontal bar per bound row showing the headroom between observed value
and claimed bound (log10 of their ratio); failed checks are drawn in red.
Rows without a numeric claim (tracked-only entries) are skipped.
"""

from __future__ import annotations

import math


def _as_number(v):
    if v is None or isinstance(v, bool):
        return None
    if isinstance(v, (int, float)):
        return float(v)
    s = str(v)
    try:
        return float(int(s))
    except ValueError:
        pass
    if "~=" in s:
        try:
            return float(s.split("~=")[-1].strip())
        except ValueError:
            return None
    try:
        return float(s)
    except ValueError:
        return None


def render_bounds_figure(agg: dict, path) -> int:
    """Write a bound-headroom chart for an aggregated report; returns the
    number of rows drawn."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    labels, margins, colors = [], [], []
    for row in agg["rows"]:
        claimed = _as_number(row["claimed"])
        observed = _as_number(row["observed"])
        if claimed is None or observed is None:
            continue
        margin = math.log10((claimed + 1.0) / (observed + 1.0))
        labels.append(f"{row['instance']}: {row['bound']}")
        margins.append(margin)
        colors.append("#2a9d2a" if row["ok"] else "#d62728")

    height = max(2.0, 0.32 * len(labels) + 1.2)
    fig, ax = plt.subplots(figsize=(9, height))
    if labels:
        ypos = range(len(labels))
        ax.barh(ypos, margins, color=colors)
        ax.set_yticks(list(ypos))
        ax.set_yticklabels(labels, fontsize=7)
        ax.invert_yaxis()
    ax.axvline(0.0, color="black", linewidth=0.8)
    ax.set_xlabel("log10(claimed+1) - log10(observed+1)   [left of 0 = violated]")
    ax.set_title(
        f"bound headroom: {agg['totals']['checks']} checks, "
        f"{agg['totals']['failures']} failures"
    )
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return len(labels)
