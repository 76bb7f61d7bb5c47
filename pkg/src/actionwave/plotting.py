"""Optional figure rendering for CLI reports.

The data files are the primary output; these helpers draw the same
numbers when a figure path is requested. Imported lazily by the CLI so
plain runs never touch matplotlib.
"""
from __future__ import annotations

from typing import Sequence

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

_STYLE = {
    "figure.figsize": (6.4, 4.2),
    "figure.dpi": 110,
    "savefig.dpi": 150,
    "axes.grid": True,
    "grid.alpha": 0.3,
    "font.size": 10,
}


def _save(fig, path: str) -> None:
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)


def scan_figure(
    path: str,
    x: Sequence[float],
    x_label: str,
    series: Sequence[dict],
    title: str = "",
    y_label: str = "",
    log: bool = False,
) -> None:
    """Analytic curves as lines, empirical points with error bars.

    Each entry of `series` is {"label", "y", optional "yerr",
    "kind": "line" | "points"}.
    """
    with plt.rc_context(_STYLE):
        fig, ax = plt.subplots()
        for s in series:
            if s.get("kind", "points") == "line":
                ax.plot(x, s["y"], "-", lw=1.5, label=s["label"])
            else:
                ax.errorbar(
                    x, s["y"], yerr=s.get("yerr"), fmt="o", ms=4,
                    capsize=2, lw=1, label=s["label"],
                )
        if log:
            ax.set_xscale("log")
            ax.set_yscale("log")
        ax.set_xlabel(x_label)
        if y_label:
            ax.set_ylabel(y_label)
        if title:
            ax.set_title(title)
        ax.legend()
        _save(fig, path)


def frequency_figure(
    path: str,
    labels: Sequence[str],
    analytic: Sequence[float],
    empirical: Sequence[float],
    std_err: Sequence[float] | None = None,
    title: str = "",
) -> None:
    """Outcome frequencies next to their predicted probabilities."""
    with plt.rc_context(_STYLE):
        fig, ax = plt.subplots()
        pos = range(len(labels))
        ax.bar([p - 0.18 for p in pos], analytic, width=0.36, label="analytic")
        ax.bar(
            [p + 0.18 for p in pos], empirical, width=0.36,
            yerr=std_err, capsize=3, label="empirical",
        )
        ax.set_xticks(list(pos))
        ax.set_xticklabels(labels)
        ax.set_ylabel("probability")
        if title:
            ax.set_title(title)
        ax.legend()
        _save(fig, path)


def snapshot_figure(path: str, x, amplitude, re_psi, action, title: str = "") -> None:
    """Wavefunction snapshot: amplitude, real part, and the phase profile."""
    with plt.rc_context(_STYLE):
        fig, (top, bottom) = plt.subplots(2, 1, sharex=True, figsize=(6.4, 5.4))
        top.plot(x, amplitude, lw=1.5, label="A")
        top.plot(x, re_psi, lw=0.9, alpha=0.8, label="Re psi")
        top.set_ylabel("amplitude")
        top.legend()
        bottom.plot(x, action, lw=1.2, color="tab:green")
        bottom.set_ylabel("S")
        bottom.set_xlabel("x")
        if title:
            top.set_title(title)
        _save(fig, path)
