"""End-to-end runs: noise, masks, effective costs, distributed solve, privacy analysis."""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .cost_model import CostSet, centralized_minimizer, effective_costs
from .errors import InvalidSigma
from .masking import NoiseTable, compute_masks, sample_pairwise_noise
from .optimizer import OptimizerTrace, dgd_run, leaky_broadcast_view
from .privacy import AdversaryView, Breach, PrivacyReport, analyze, assemble_view
from .scenario import Scenario


def _floats(a) -> list:
    return np.asarray(a, dtype=float).tolist()


def _check(passed: bool, deviation: float, tolerance: float) -> dict:
    return {"pass": bool(passed), "deviation": float(deviation), "tolerance": float(tolerance)}


@dataclass
class RunReport:
    scenario: str
    x_star_centralized: np.ndarray
    x_star_distributed: np.ndarray
    masks: np.ndarray
    effective_alpha: np.ndarray
    checks: dict
    privacy: PrivacyReport
    view: AdversaryView
    trace: OptimizerTrace = field(repr=False)
    trace_path: str | None = None

    @property
    def ok(self) -> bool:
        return all(c["pass"] for c in self.checks.values())

    def to_dict(self) -> dict:
        return {
            "scenario": self.scenario,
            "x_star_centralized": _floats(self.x_star_centralized),
            "x_star_distributed": _floats(self.x_star_distributed),
            "iterations": self.trace.iterations,
            "converged": self.trace.converged,
            "masks": _floats(self.masks),
            "effective_alpha": _floats(self.effective_alpha),
            "checks": self.checks,
            "privacy": self.privacy.to_dict(),
            "adversary_view": {
                "honest": list(self.view.honest),
                "effective_alpha_honest": _floats(self.view.effective_alpha_honest),
                "corrupt_edge_noise": {f"{i}-{j}": _floats(b) for (i, j), b in self.view.corrupt_edge_noise.items()},
            },
            "trace_path": self.trace_path,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2) + "\n"


def phase_one(s: Scenario) -> tuple[NoiseTable, np.ndarray, CostSet]:
    """Noise table (injected or sampled), masks and effective costs for ``s``."""
    noise = s.noise_table() or sample_pairwise_noise(s.graph, s.sigma, s.m, s.seed)
    masks = compute_masks(noise)
    return noise, masks, effective_costs(s.costs, masks)


def run_protocol(s: Scenario, trace_path=None) -> RunReport:
    """Run both phases on ``s`` and evaluate the correctness checks."""
    noise, masks, effective = phase_one(s)
    scale = s.graph.n * max(s.sigma, 1.0)

    mask_dev = float(np.abs(masks.sum(axis=0)).max())
    mask_tol = 1e-12 * scale
    before, after = s.costs.aggregate(), effective.aggregate()
    agg_dev = max(
        float(np.abs(before.Q - after.Q).max()),
        float(np.abs(before.alpha - after.alpha).max()),
        abs(before.c - after.c),
    )

    x_star = centralized_minimizer(s.costs)
    trace = dgd_run(s.graph, leaky_broadcast_view(effective), s.optimizer)
    final = trace.final
    opt_dev = float(np.linalg.norm(final - x_star, axis=1).max())

    checks = {
        "mask_sum": _check(mask_dev <= mask_tol, mask_dev, mask_tol),
        "aggregate_preserved": _check(agg_dev <= mask_tol, agg_dev, mask_tol),
        "optimality": _check(opt_dev < s.optimizer.tol, opt_dev, s.optimizer.tol),
    }
    view = assemble_view(s.graph, s.adversary, noise, effective.alpha, s.costs)
    privacy = analyze(s.graph, s.adversary, s.sigma)

    written = None
    if trace_path is not None:
        written = str(trace.to_csv(trace_path))
    return RunReport(s.name, x_star, final, masks, effective.alpha, checks, privacy, view, trace, written)


@dataclass(frozen=True)
class SweepRow:
    sigma: float
    epsilon: float | Breach
    final_residual: float
    iterations: int
    converged: bool

    def as_list(self) -> list:
        eps = "breach" if isinstance(self.epsilon, Breach) else repr(self.epsilon)
        return [repr(self.sigma), eps, repr(self.final_residual), self.iterations, self.converged]


SWEEP_COLUMNS = ["sigma", "epsilon", "final_residual", "iterations", "converged"]


def sweep_sigma(s: Scenario, sigmas: Sequence[float]) -> list[SweepRow]:
    """One full run per noise scale, rows in input order.

    Noise is sampled from the scenario seed at each scale; an injected table
    only fits the scale it was written for and is ignored here.
    """
    sigmas = [float(v) for v in sigmas]
    bad = [v for v in sigmas if not v > 0]
    if bad:
        raise InvalidSigma(f"sweep needs sigma > 0, got {bad}")
    rows = []
    for sigma in sigmas:
        report = run_protocol(s.with_sigma(sigma))
        rows.append(
            SweepRow(
                sigma,
                report.privacy.epsilon,
                float(report.trace.residuals[-1]),
                report.trace.iterations,
                report.trace.converged,
            )
        )
    return rows


def write_sweep_csv(rows: Sequence[SweepRow], path) -> Path:
    path = Path(path)
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(SWEEP_COLUMNS)
        writer.writerows(row.as_list() for row in rows)
    return path
