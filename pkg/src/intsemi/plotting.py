"""Plot output: two-column data files with a ``#`` header, and PNG figures."""

from __future__ import annotations

from pathlib import Path

import numpy as np


def write_plot_data(path, x, y, xlabel="x", ylabel="y", title="") -> Path:
    """Whitespace-separated ``x y`` rows; header lines start with ``#`` (gnuplot reads them as comments)."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    lines = []
    if title:
        lines.append(f"# {title}")
    lines.append(f"# {xlabel} {ylabel}")
    lines += [f"{a:.17g} {b:.17g}" for a, b in zip(x, y)]
    path.write_text("\n".join(lines) + "\n")
    return path


def read_plot_data(path):
    data = np.loadtxt(path, comments="#", ndmin=2)
    return data[:, 0], data[:, 1]


def render_figure(path, series, xlabel="x", ylabel="y", title="", logx=False, logy=False) -> Path:
    """Render ``series`` (a list of ``(x, y, label)``) to a PNG with the Agg backend."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fig, ax = plt.subplots(figsize=(6, 4))
    for x, y, label in series:
        ax.plot(x, y, marker=".", label=label)
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    if title:
        ax.set_title(title)
    if logx:
        ax.set_xscale("log")
    if logy:
        ax.set_yscale("log")
    if any(lbl for *_, lbl in series):
        ax.legend()
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=100)
    plt.close(fig)
    return path


def emit_plot(out_dir, stem, x, y, xlabel, ylabel, title="", logx=False, logy=False, label=None):
    """Write ``stem.dat`` and ``stem.png`` side by side; returns both paths."""
    out_dir = Path(out_dir)
    dat = write_plot_data(out_dir / f"{stem}.dat", x, y, xlabel, ylabel, title)
    png = render_figure(out_dir / f"{stem}.png", [(x, y, label or "")], xlabel, ylabel, title, logx, logy)
    return dat, png


__all__ = ["write_plot_data", "read_plot_data", "render_figure", "emit_plot"]
