"""Figure rendering for efficiency curves and comparison tables.

Every CLI report that writes delimited output can also render the same
data as a matplotlib figure next to it; the output format follows the
file extension.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

_CURVE_STYLES = (
    ("eta_A", "black", "-"),
    ("eta_D", "0.2", ":"),
    ("eta_E", "0.4", "--"),
    ("eta_ST", "0.6", "-"),
)


def render_curves(rows: np.ndarray, criterion_label: str, path: str) -> None:
    """Plot the four design-efficiency curves against the squared length."""
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    r2 = rows[:, 0]
    for k, (label, color, style) in enumerate(_CURVE_STYLES):
        ax.plot(r2, rows[:, k + 1], style, color=color, label=label)
    ax.set_xlabel(r"$|\theta|^2$")
    ax.set_ylabel("efficiency")
    ax.set_title(f"design efficiency under the {criterion_label} criterion")
    ax.set_ylim(-0.02, 1.05)
    ax.legend(frameon=False)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def render_efficiency_report(report, path: str) -> None:
    """Grouped bar chart of design efficiencies per criterion."""
    designs = list(dict.fromkeys(row.design for row in report.rows))
    criteria = list(dict.fromkeys(row.criterion for row in report.rows))
    table = {(row.design, row.criterion): row.efficiency for row in report.rows}
    fig, ax = plt.subplots(figsize=(1.6 + 1.2 * len(criteria), 4.0))
    width = 0.8 / max(1, len(designs))
    base = np.arange(len(criteria), dtype=float)
    for j, design in enumerate(designs):
        heights = [table.get((design, c), 0.0) for c in criteria]
        heights = [0.0 if not np.isfinite(h) else h for h in heights]
        ax.bar(base + j * width, heights, width=width, label=design)
    ax.set_xticks(base + 0.4 - width / 2)
    ax.set_xticklabels(criteria)
    ax.set_ylabel("efficiency")
    ax.set_ylim(0.0, 1.05)
    ax.legend(frameon=False, ncols=min(4, len(designs)))
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
