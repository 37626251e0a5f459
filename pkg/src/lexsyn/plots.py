"""SVG figures: group z-scores vs level, importance coefficients, rank heatmap.

Output is deterministic: a fixed hash salt keeps matplotlib's generated ids
stable and no creation date is embedded.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
from matplotlib.patches import Rectangle

from .errors import ValidationError

_COLORS = {
    "white": "#ffffff",
    "blue": "#4878a8",
    "red": "#c44e52",
    "yellow": "#e8c84d",
}


def cell_color(delta: int, baseline_significant: bool, max_abs: int) -> str:
    """Rank-heatmap cell convention: white for features that were not
    significant on the original text, blue/red for the strongest rank
    increase/decrease, yellow for smaller movement either way."""
    if not baseline_significant:
        return "white"
    if max_abs > 0 and delta >= 0.5 * max_abs:
        return "blue"
    if max_abs > 0 and delta <= -0.5 * max_abs:
        return "red"
    return "yellow"


def _savefig(fig, path: Path) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)


def emit_plots(bundle, out: str | Path) -> list[Path]:
    """Write the three report figures; returns the created paths."""
    missing = [
        name
        for name, payload in (
            ("z_summary", bundle.z_summary),
            ("importance", bundle.importance),
            ("ranks", bundle.ranks),
        )
        if not payload
    ]
    if missing:
        raise ValidationError(f"bundle is missing tables: {missing}")
    out = Path(out)
    with plt.rc_context({"svg.hashsalt": "lexsyn"}):
        paths = [
            _plot_z_vs_level(bundle, out / "z_vs_level.svg"),
            _plot_importance(bundle, out / "importance.svg"),
            _plot_rank_heatmap(bundle, out / "rank_heatmap.svg"),
        ]
    return paths


def _plot_z_vs_level(bundle, path: Path) -> Path:
    rows = sorted(bundle.z_summary["levels"], key=lambda r: r["level"])
    levels = [r["level"] for r in rows]
    fig, ax = plt.subplots(figsize=(5, 4))
    ax.plot(levels, [r["z_lexical"] for r in rows], marker="o", label="lexical",
            color=_COLORS["red"])
    ax.plot(levels, [r["z_syntactic"] for r in rows], marker="s", label="syntactic",
            color=_COLORS["blue"])
    ax.set_xlabel("alteration level (%)")
    ax.set_ylabel(f"group z-score ({bundle.z_summary['mode']})")
    ax.set_title("Feature change under word deletion")
    ax.legend()
    fig.tight_layout()
    _savefig(fig, path)
    return path


def _plot_importance(bundle, path: Path) -> Path:
    fits = [r for r in bundle.importance if "error" not in r]
    fig, ax = plt.subplots(figsize=(5, 4))
    if fits:
        models = [r["model"] for r in fits]
        x = range(len(models))
        width = 0.38
        ax.bar([i - width / 2 for i in x], [r["alpha_syntactic"] for r in fits], width,
               label="syntactic coefficient", color=_COLORS["blue"])
        ax.bar([i + width / 2 for i in x], [r["beta_lexical"] for r in fits], width,
               label="lexical coefficient", color=_COLORS["red"])
        ax.set_xticks(list(x))
        ax.set_xticklabels(models)
        ax.axhline(0.0, color="black", linewidth=0.8)
        ax.legend()
    else:
        ax.text(0.5, 0.5, "no non-degenerate fits", ha="center", va="center")
    ax.set_ylabel("coefficient")
    ax.set_title("Importance of feature-group change for F1 loss")
    fig.tight_layout()
    _savefig(fig, path)
    return path


def _plot_rank_heatmap(bundle, path: Path) -> Path:
    levels = sorted(int(level) for level in bundle.ranks["levels"])
    baseline = bundle.ranks["baseline"]
    names = [e["name"] for e in baseline]
    significant = {e["name"]: e["significant"] for e in baseline}
    deltas = {
        (d["name"], level): d["delta"]
        for level in levels
        for d in bundle.ranks["levels"][str(level)]
    }
    max_abs = max((abs(d) for d in deltas.values()), default=0)
    fig_height = max(3.0, 0.18 * len(names) + 1.2)
    fig, ax = plt.subplots(figsize=(1.2 * len(levels) + 2.5, fig_height))
    for i, name in enumerate(names):
        for j, level in enumerate(levels):
            delta = deltas[(name, level)]
            color = cell_color(delta, significant[name], max_abs)
            ax.add_patch(
                Rectangle((j, len(names) - 1 - i), 1, 1,
                          facecolor=_COLORS[color], edgecolor="#888888", linewidth=0.4)
            )
            if significant[name]:
                ax.text(j + 0.5, len(names) - 1 - i + 0.5, f"{delta:+d}",
                        ha="center", va="center", fontsize=6)
    ax.set_xlim(0, len(levels))
    ax.set_ylim(0, len(names))
    ax.set_xticks([j + 0.5 for j in range(len(levels))])
    ax.set_xticklabels([f"{level}%" for level in levels])
    ax.set_yticks([len(names) - 1 - i + 0.5 for i in range(len(names))])
    ax.set_yticklabels(names, fontsize=6)
    ax.set_title("Feature significance rank change (white: not significant originally)")
    fig.tight_layout()
    _savefig(fig, path)
    return path
