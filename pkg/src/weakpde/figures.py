"""Headless figure rendering for identify reports.

Two diagnostic views: the recovered coefficient curves c_k(x) for the selected
groups, and the residual/reduction tables behind the sparsity choice.  Both
take the JSON report document emitted by the CLI, so figures can be rebuilt
later from a saved report without re-running the pipeline.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402 - backend must be pinned first


def coefficient_figure(curves, path, title=None):
    """Plot each selected group's sampled coefficient curve against x."""
    x = curves["x"]
    fig, ax = plt.subplots(figsize=(7.0, 4.0))
    for label, values in sorted(curves["groups"].items()):
        ax.plot(x, values, label=label, linewidth=1.6)
    ax.set_xlabel("x")
    ax.set_ylabel("coefficient")
    if title:
        ax.set_title(title)
    if curves["groups"]:
        ax.legend(frameon=False)
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return Path(path)


def selection_figure(q, s, theta_star, path, rho=None):
    """Plot the residual curve q and reduction scores s over sparsity."""
    fig, (top, bottom) = plt.subplots(2, 1, figsize=(7.0, 5.5), sharex=True)
    thetas_q = range(1, len(q) + 1)
    top.semilogy(list(thetas_q), q, marker="o", linewidth=1.4)
    top.axvline(theta_star, color="tab:red", linestyle="--", linewidth=1.0)
    top.set_ylabel("residual q")
    top.grid(True, alpha=0.3)

    thetas_s = range(1, len(s) + 1)
    bottom.semilogy(list(thetas_s), [max(v, 1e-16) for v in s], marker="s",
                    color="tab:green", linewidth=1.4)
    if rho is not None:
        bottom.axhline(rho, color="tab:gray", linestyle=":", linewidth=1.0)
    bottom.axvline(theta_star, color="tab:red", linestyle="--", linewidth=1.0)
    bottom.set_xlabel("sparsity level")
    bottom.set_ylabel("reduction s")
    bottom.grid(True, alpha=0.3)

    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return Path(path)


def render_report(document, out_dir):
    """Render both diagnostic figures for a report document; returns paths."""
    directory = Path(out_dir)
    directory.mkdir(parents=True, exist_ok=True)
    support = ", ".join(document["support"])
    written = [
        coefficient_figure(
            document["curves"],
            directory / "coefficients.png",
            title=f"selected: {support}" if support else "no groups selected",
        ),
        selection_figure(
            document["q"],
            document["s"],
            document["theta_star"],
            directory / "selection.png",
            rho=document.get("config_echo", {}).get("rho_r"),
        ),
    ]
    return written
