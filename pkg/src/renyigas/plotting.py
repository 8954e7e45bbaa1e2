"""Deterministic SVG output (fixed hash salt, no timestamps)."""
import numpy as np


def _pyplot():
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt
    matplotlib.rcParams["svg.hashsalt"] = "renyigas"
    return plt


def save_svg(fig, path):
    fig.savefig(path, format="svg", metadata={"Date": None})


def convergence_plot(report, path):
    """Normalized trace against 1 / (alpha T**(1/2m)); targets as lines."""
    plt = _pyplot()
    fig, ax = plt.subplots(figsize=(5, 3.5))
    gammas = []
    for r in report.rows:
        if r["gamma"] not in gammas:
            gammas.append(r["gamma"])
    for g in gammas:
        rows = [r for r in report.rows if r["gamma"] == g]
        x = np.array([1.0 / r["scale"] for r in rows])
        y = np.array([r["normalized"] for r in rows])
        line, = ax.plot(x, y, "o-", label=f"{g}")
        ax.axhline(rows[0]["target"], color=line.get_color(), ls="--", lw=0.8)
    ax.set_xlabel("1 / scale")
    ax.set_ylabel("normalized trace")
    if gammas:
        ax.legend(title="gamma", fontsize=7)
    fig.tight_layout()
    save_svg(fig, path)
    plt.close(fig)
