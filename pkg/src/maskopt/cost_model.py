"""Quadratic agent costs with an explicit affine part.

Agent ``i`` holds ``h_i(x) = 1/2 x^T Q_i x + alpha_i^T x + c_i``. The protocol
only ever touches ``alpha_i``; ``Q_i`` and ``c_i`` pass through unchanged.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Sequence

import numpy as np

from .errors import NoUniqueMinimizer, ShapeError
from .spectral import sym_matrix, symmetric_eigen, zero_cutoff


@dataclass(frozen=True)
class QuadraticCost:
    Q: np.ndarray
    alpha: np.ndarray
    c: float = 0.0

    def __post_init__(self):
        alpha = np.atleast_1d(np.asarray(self.alpha, dtype=float))
        if alpha.ndim != 1:
            raise ShapeError(f"alpha must be a vector, got shape {alpha.shape}")
        q = sym_matrix(self.Q)
        if q.shape != (alpha.size, alpha.size):
            raise ShapeError(f"Q has shape {q.shape}, expected {(alpha.size, alpha.size)}")
        object.__setattr__(self, "alpha", alpha)
        object.__setattr__(self, "Q", q)
        object.__setattr__(self, "c", float(self.c))

    @property
    def m(self) -> int:
        return self.alpha.size

    @classmethod
    def from_vertex(cls, center, weight: float = 1.0) -> "QuadraticCost":
        """``weight * ||x - center||^2`` expanded into quadratic, affine and constant parts."""
        center = np.atleast_1d(np.asarray(center, dtype=float))
        m = center.size
        return cls(2.0 * weight * np.eye(m), -2.0 * weight * center, weight * float(center @ center))


def _check_point(cost: QuadraticCost, x) -> np.ndarray:
    x = np.atleast_1d(np.asarray(x, dtype=float))
    if x.shape != (cost.m,):
        raise ShapeError(f"point has shape {x.shape}, cost expects ({cost.m},)")
    return x


def evaluate(cost: QuadraticCost, x) -> float:
    x = _check_point(cost, x)
    return float(0.5 * x @ cost.Q @ x + cost.alpha @ x + cost.c)


def gradient(cost: QuadraticCost, x) -> np.ndarray:
    x = _check_point(cost, x)
    return cost.Q @ x + cost.alpha


def affine_part(cost: QuadraticCost) -> np.ndarray:
    return cost.alpha


@dataclass(frozen=True)
class CostSet:
    """One quadratic cost per agent, all over the same ``R^m``."""

    costs: tuple[QuadraticCost, ...]

    def __post_init__(self):
        costs = tuple(self.costs)
        if not costs:
            raise ShapeError("cost set is empty")
        dims = {c.m for c in costs}
        if len(dims) != 1:
            raise ShapeError(f"agents disagree on dimension: {sorted(dims)}")
        object.__setattr__(self, "costs", costs)

    def __len__(self) -> int:
        return len(self.costs)

    def __getitem__(self, i: int) -> QuadraticCost:
        return self.costs[i]

    def __iter__(self):
        return iter(self.costs)

    @property
    def n(self) -> int:
        return len(self.costs)

    @property
    def m(self) -> int:
        return self.costs[0].m

    @property
    def alpha(self) -> np.ndarray:
        """Affine coefficients stacked as an ``n x m`` array."""
        return np.stack([c.alpha for c in self.costs])

    @property
    def hessians(self) -> np.ndarray:
        return np.stack([c.Q for c in self.costs])

    def aggregate(self) -> QuadraticCost:
        """The single quadratic equal to the sum of all agents' costs."""
        return QuadraticCost(
            sum(c.Q for c in self.costs),
            np.sum(self.alpha, axis=0),
            sum(c.c for c in self.costs),
        )


def cost_set(costs: Sequence[QuadraticCost]) -> CostSet:
    return CostSet(tuple(costs))


def effective_costs(costs: CostSet, masks) -> CostSet:
    """Add mask ``a_i`` to agent ``i``'s affine coefficient; quadratic and constant parts are untouched."""
    masks = np.asarray(masks, dtype=float)
    if masks.shape != (costs.n, costs.m):
        raise ShapeError(f"masks have shape {masks.shape}, expected {(costs.n, costs.m)}")
    return CostSet(tuple(replace(c, alpha=c.alpha + a) for c, a in zip(costs, masks)))


def require_positive_definite(q) -> None:
    vals = symmetric_eigen(q).eigenvalues
    if vals[-1] <= zero_cutoff(np.abs(vals)):
        raise NoUniqueMinimizer(f"aggregate Hessian is not positive definite (smallest eigenvalue {vals[-1]:.3g})")


def centralized_minimizer(costs: CostSet) -> np.ndarray:
    """Closed-form minimizer ``-(sum Q_i)^-1 (sum alpha_i)`` of the aggregate cost."""
    total = costs.aggregate()
    require_positive_definite(total.Q)
    return -np.linalg.solve(total.Q, total.alpha)
