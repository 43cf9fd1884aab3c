"""Loss-history figure written next to the CSV."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402


def plot_loss_history(history, path, title: str | None = None):
    """Render ``history`` (one loss per iteration) to a PNG at ``path``."""
    fig, ax = plt.subplots(figsize=(5.0, 3.2), dpi=120)
    try:
        ax.plot(range(len(history)), history, lw=1.2, color="#2a6f97")
        ax.set_xlabel("SPSA iteration")
        ax.set_ylabel("train loss")
        ax.set_xlim(0, max(len(history) - 1, 1))
        ax.set_ylim(bottom=0)
        ax.grid(alpha=0.3, lw=0.5)
        if title:
            ax.set_title(title, fontsize=9)
        fig.tight_layout()
        # fixed metadata keeps reruns byte-identical
        fig.savefig(path, format="png", metadata={"Software": None})
    finally:
        plt.close(fig)
    return path
