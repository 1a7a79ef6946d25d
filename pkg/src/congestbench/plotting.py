"""Render sweep reports as matplotlib figures next to the data files."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402

from .sweep import SweepReport, _fit_metric  # noqa: E402


def render_figure(report: SweepReport, path) -> None:
    """Round complexity as a function of the per-edge capacity B."""
    metric = _fit_metric(report.problem)
    bs = [row["B"] for row in report.rows]
    rounds = [row[metric] for row in report.rows]

    fig, ax = plt.subplots(figsize=(5.2, 3.4))
    ax.plot(bs, rounds, "o-", color="#27567b")
    ax.set_xscale("log", base=2)
    if max(rounds) > 4 * min(rounds):
        ax.set_yscale("log", base=2)
    ax.set_xlabel("B (bits per edge per round)")
    ax.set_ylabel("rounds")
    ax.set_title(
        f"{report.problem} on {report.instance}: "
        f"beta={report.beta:.2f} ({report.label})"
    )
    ax.grid(True, which="both", alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
