"""Figures written next to the CSV outputs of ``run`` and ``sweep``.

Uses the object-oriented matplotlib API only, so no global backend or pyplot
state is touched.
"""

from __future__ import annotations

from pathlib import Path
from typing import Sequence

import numpy as np
from matplotlib.figure import Figure

from .optimizer import OptimizerTrace
from .privacy import Breach

FIGSIZE = (7.0, 3.2)
RC = {"linewidth": 1.2}


def _save(fig: Figure, path) -> Path:
    path = Path(path)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    return path


def _positive(values) -> np.ndarray:
    # exact zeros (e.g. identical starting points) would wreck a log axis
    out = np.asarray(values, dtype=float).copy()
    out[out <= 0] = np.nan
    return out


def plot_trace(trace: OptimizerTrace, path, title: str | None = None) -> Path:
    """Residual/disagreement on a log axis (left) and each agent's first coordinate (right)."""
    fig = Figure(figsize=FIGSIZE)
    ax_res, ax_x = fig.subplots(1, 2)
    t = np.arange(trace.residuals.size)
    ax_res.semilogy(t, _positive(trace.residuals), label="max residual", **RC)
    ax_res.semilogy(t, _positive(trace.disagreement), label="disagreement", ls="--", **RC)
    ax_res.axhline(trace.params.tol, color="grey", lw=0.8, ls=":")
    ax_res.set_xlabel("iteration")
    ax_res.legend(frameon=False, fontsize=8)

    for i in range(trace.iterates.shape[1]):
        ax_x.plot(t, trace.iterates[:, i, 0], lw=0.9, label=f"agent {i + 1}")
    ax_x.axhline(trace.x_star[0], color="k", lw=0.8, ls=":")
    ax_x.set_xlabel("iteration")
    ax_x.set_ylabel("x[1]")
    if trace.iterates.shape[1] <= 6:
        ax_x.legend(frameon=False, fontsize=8)
    if title:
        fig.suptitle(title, fontsize=10)
    return _save(fig, path)


def plot_sweep(rows: Sequence, path, title: str | None = None) -> Path:
    """Epsilon and final optimizer residual against the noise scale."""
    fig = Figure(figsize=FIGSIZE)
    ax_eps, ax_res = fig.subplots(1, 2)
    sig = np.array([r.sigma for r in rows])
    finite = [(r.sigma, r.epsilon) for r in rows if not isinstance(r.epsilon, Breach)]
    if finite:
        s, e = np.array(finite).T
        ax_eps.loglog(s, e, "o-", **RC)
    ax_eps.set_xlabel("sigma")
    ax_eps.set_ylabel("epsilon")
    ax_res.semilogy(sig, _positive([r.final_residual for r in rows]), "s-", **RC)
    ax_res.set_xscale("log")
    ax_res.set_xlabel("sigma")
    ax_res.set_ylabel("final residual")
    if title:
        fig.suptitle(title, fontsize=10)
    return _save(fig, path)
