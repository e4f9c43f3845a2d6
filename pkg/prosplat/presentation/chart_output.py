"""Chart output — optional matplotlib figures for command results."""

import logging
from typing import Dict, Sequence

import numpy as np

logger = logging.getLogger(__name__)

CHART_THEME = {
    "bg": "#131722",
    "fg": "#d1d4dc",
    "grid": "#2a2e39",
    "bar": "#26a69a",
    "bar_selected": "#f7c948",
    "line": "#42a5f5",
    "marker": "#ef5350",
}


def _pyplot():
    try:
        import matplotlib
        matplotlib.use("Agg")
        import matplotlib.pyplot as plt
    except ImportError:
        logger.warning("matplotlib is required for charts. Install with: pip install matplotlib")
        return None
    return plt


def _style(fig, ax) -> None:
    fig.patch.set_facecolor(CHART_THEME["bg"])
    ax.set_facecolor(CHART_THEME["bg"])
    ax.tick_params(colors=CHART_THEME["fg"])
    ax.grid(color=CHART_THEME["grid"], linewidth=0.5)
    for spine in ax.spines.values():
        spine.set_color(CHART_THEME["grid"])


def plot_scores(labels: Sequence[str], scores: Sequence[float], selected: Sequence[bool],
                title: str, save_path: str) -> None:
    """Bar chart of candidate overlap scores, winners highlighted."""
    plt = _pyplot()
    if plt is None:
        return
    fig, ax = plt.subplots(figsize=(10, 4))
    _style(fig, ax)
    colors = [CHART_THEME["bar_selected"] if s else CHART_THEME["bar"] for s in selected]
    ax.bar(range(len(scores)), scores, color=colors)
    ax.set_xticks(range(len(scores)), labels, rotation=45, ha="right")
    ax.set_title(title, color=CHART_THEME["fg"])
    fig.tight_layout()
    fig.savefig(save_path, dpi=100, facecolor=fig.get_facecolor())
    plt.close(fig)


def plot_cost_curves(curves: Dict[str, np.ndarray], depths: np.ndarray,
                     title: str, save_path: str) -> None:
    """Matching cost against depth candidate, one line per pixel label."""
    plt = _pyplot()
    if plt is None:
        return
    fig, ax = plt.subplots(figsize=(10, 4))
    _style(fig, ax)
    for label, curve in curves.items():
        ax.plot(depths, curve, linewidth=1.2, label=label)
        ax.scatter([depths[int(np.argmax(curve))]], [float(np.max(curve))],
                   color=CHART_THEME["marker"], s=12)
    ax.set_xlabel("depth", color=CHART_THEME["fg"])
    ax.set_title(title, color=CHART_THEME["fg"])
    if curves:
        ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(save_path, dpi=100, facecolor=fig.get_facecolor())
    plt.close(fig)


def plot_metrics(names: Sequence[str], psnr: Sequence[float], ssim: Sequence[float],
                 save_path: str) -> None:
    """Per-view PSNR (finite values) and SSIM side by side."""
    plt = _pyplot()
    if plt is None:
        return
    fig, (ax_p, ax_s) = plt.subplots(1, 2, figsize=(12, 4))
    for ax, values, title in ((ax_p, psnr, "PSNR (dB)"), (ax_s, ssim, "SSIM")):
        _style(fig, ax)
        shown = [v if np.isfinite(v) else 0.0 for v in values]
        ax.bar(range(len(shown)), shown, color=CHART_THEME["bar"])
        ax.set_xticks(range(len(shown)), names, rotation=45, ha="right")
        ax.set_title(title, color=CHART_THEME["fg"])
    fig.tight_layout()
    fig.savefig(save_path, dpi=100, facecolor=fig.get_facecolor())
    plt.close(fig)
