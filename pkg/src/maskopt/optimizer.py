"""Phase two: consensus-based gradient descent over the communication graph.

Two update rules share the Metropolis mixing matrix ``W``:

``"dgd"``
    x_i(t+1) = sum_j W_ij x_j(t) - eta_t grad h_i(x_i(t)), with
    ``eta_t = step0 / sqrt(t + 1)`` (``decay="sqrt"``) or ``eta_t = step0``
    (``decay="constant"``, biased by O(step0)).

``"tracking"``
    DGD with a gradient-tracking correction: each agent also mixes a running
    estimate ``y_i`` of the average gradient and steps along it,

        x(t+1) = W x(t) - eta y(t)
        y(t+1) = W y(t) + grad(x(t+1)) - grad(x(t)),   y(0) = grad(x(0))

    With a constant step this converges linearly to the exact minimizer, which
    plain DGD only reaches asymptotically.

Rounds are synchronous: every agent reads only the previous round's state.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .cost_model import CostSet, centralized_minimizer
from .errors import Diverged, InvalidArgument, NotConnected
from .graph import Graph, is_connected

DIVERGENCE_FACTOR = 1e6


def metropolis_weights(g: Graph) -> np.ndarray:
    """Symmetric doubly stochastic weights ``1 / (1 + max(d_i, d_j))`` on edges."""
    if not is_connected(g):
        raise NotConnected("Metropolis weights need a connected graph")
    w = np.zeros((g.n, g.n))
    for i, j in g.edges:
        w[i - 1, j - 1] = w[j - 1, i - 1] = 1.0 / (1 + max(g.degree(i), g.degree(j)))
    w[np.diag_indices(g.n)] = 1.0 - w.sum(axis=1)
    return w


@dataclass(frozen=True)
class OptimizerParams:
    step0: float = 0.1
    decay: str = "sqrt"
    max_iters: int = 10_000
    tol: float = 1e-6
    method: str = "dgd"

    def __post_init__(self):
        if self.method not in ("dgd", "tracking"):
            raise InvalidArgument(f"unknown method {self.method!r}")
        if self.decay not in ("sqrt", "constant"):
            raise InvalidArgument(f"unknown decay mode {self.decay!r}")
        if not self.step0 > 0:
            raise InvalidArgument(f"step0 must be positive, got {self.step0}")
        if self.max_iters < 0 or not self.tol > 0:
            raise InvalidArgument("max_iters must be >= 0 and tol > 0")

    def step(self, t: int) -> float:
        if self.method == "tracking" or self.decay == "constant":
            return self.step0
        return self.step0 / np.sqrt(t + 1)


@dataclass
class OptimizerTrace:
    """Per-iteration record; index 0 holds the initial state."""

    iterates: np.ndarray  # (T + 1, n, m)
    residuals: np.ndarray  # (T + 1,) max_i ||x_i(t) - x*||
    disagreement: np.ndarray  # (T + 1,) max_{i,j} ||x_i(t) - x_j(t)||
    params: OptimizerParams
    x_star: np.ndarray
    iterations: int
    converged: bool
    extra: dict = field(default_factory=dict)

    @property
    def final(self) -> np.ndarray:
        return self.iterates[-1]

    def to_csv(self, path) -> Path:
        """Long-format CSV: one row per (iteration, agent, coordinate)."""
        path = Path(path)
        T1, n, m = self.iterates.shape
        with path.open("w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["iter", "agent", "coordinate", "value", "residual", "disagreement"])
            for t in range(T1):
                res, dis = repr(float(self.residuals[t])), repr(float(self.disagreement[t]))
                for i in range(n):
                    for k in range(m):
                        writer.writerow([t, i + 1, k + 1, repr(float(self.iterates[t, i, k])), res, dis])
        return path


def _gradients(hessians: np.ndarray, alpha: np.ndarray, x: np.ndarray) -> np.ndarray:
    return np.einsum("ikl,il->ik", hessians, x) + alpha


def _disagreement(x: np.ndarray) -> float:
    diff = x[:, None, :] - x[None, :, :]
    return float(np.sqrt((diff**2).sum(axis=-1)).max())


def _residual(x: np.ndarray, x_star: np.ndarray) -> float:
    return float(np.linalg.norm(x - x_star, axis=1).max())


def consensus_round(w: np.ndarray, x: np.ndarray, grads: np.ndarray, step: float) -> np.ndarray:
    """One synchronous DGD round, ``W x - step * grads``."""
    return w @ x - step * grads


def dgd_run(g: Graph, costs: CostSet, params: OptimizerParams | None = None, x0=None) -> OptimizerTrace:
    """Minimize the sum of ``costs`` over ``g``; agents start at zero unless ``x0`` is given.

    Stops as soon as every agent is within ``tol`` of the centralized minimizer,
    or after ``max_iters`` rounds (reported through ``converged``, not raised).

    Raises:
        NoUniqueMinimizer: the aggregate Hessian is not positive definite.
        NotConnected: ``g`` is disconnected.
        Diverged: the residual exceeds ``1e6`` times its initial value (floored at 1).
    """
    params = params or OptimizerParams()
    if costs.n != g.n:
        raise InvalidArgument(f"{costs.n} costs for {g.n} agents")
    x_star = centralized_minimizer(costs)
    w = metropolis_weights(g)
    hess, alpha = costs.hessians, costs.alpha
    x = np.zeros((g.n, costs.m)) if x0 is None else np.array(x0, dtype=float).reshape(g.n, costs.m)

    grads = _gradients(hess, alpha, x)
    tracker = grads.copy()
    iterates = [x.copy()]
    residuals = [_residual(x, x_star)]
    disagreement = [_disagreement(x)]
    limit = DIVERGENCE_FACTOR * max(residuals[0], 1.0)

    t = 0
    converged = residuals[0] < params.tol
    while not converged and t < params.max_iters:
        eta = params.step(t)
        if params.method == "dgd":
            x = consensus_round(w, x, grads, eta)
            grads = _gradients(hess, alpha, x)
        else:
            x = consensus_round(w, x, tracker, eta)
            new_grads = _gradients(hess, alpha, x)
            tracker = w @ tracker + new_grads - grads
            grads = new_grads
        t += 1
        res = _residual(x, x_star)
        iterates.append(x.copy())
        residuals.append(res)
        disagreement.append(_disagreement(x))
        if not np.isfinite(res) or res > limit:
            raise Diverged(f"residual {res:.3g} after {t} rounds (limit {limit:.3g}); reduce step0")
        converged = res < params.tol

    return OptimizerTrace(
        iterates=np.array(iterates),
        residuals=np.array(residuals),
        disagreement=np.array(disagreement),
        params=params,
        x_star=x_star,
        iterations=t,
        converged=converged,
    )


def leaky_broadcast_view(costs: CostSet) -> CostSet:
    """Worst-case phase-two protocol: every agent learns every effective cost verbatim."""
    return costs
