"""Privacy analysis of the masking phase against a passive coalition.

The corrupted set ``C`` sees the honest agents' effective coefficients plus the
edge differences ``b_e`` on every edge touching ``C``. Conditioned on those,
the honest coefficients are Gaussian with covariance ``2 sigma^2 L_H`` where
``L_H`` is the Laplacian of the honest graph, so

    KL(View(alpha) || View(alpha')) = sum_k Delta_k^T L_H^+ Delta_k / (4 sigma^2)
                                   <= dist(alpha, alpha')^2 / (4 sigma^2 mu(L_H))

with ``mu(L_H)`` the smallest nonzero Laplacian eigenvalue. If ``C`` cuts the
honest agents the bound collapses and the analysis reports a :class:`Breach`.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations
from typing import Iterable, Mapping

import numpy as np

from .cost_model import CostSet, QuadraticCost
from .errors import (
    AllZeroSpectrum,
    EmptyHonestSet,
    IncomparableCoefficients,
    InvalidArgument,
    InvalidNode,
    InvalidSigma,
    NotConnected,
    PrivacyBreach,
    ShapeError,
)
from .graph import (
    MAX_EXHAUSTIVE_NODES,
    Edge,
    Graph,
    InducedGraph,
    incidence_matrix,
    induced_honest_graph,
    is_connected,
    is_vertex_cut,
    laplacian,
    vertex_connectivity,
    vertex_expansion,
)
from .masking import NoiseTable, edge_difference, neighbor_sum_masks
from .spectral import pseudo_inverse, symmetric_eigen, zero_cutoff

COEFF_TOL = 1e-10


@dataclass(frozen=True)
class Breach:
    """Marker used in place of epsilon when no finite guarantee exists."""

    reason: str = "corrupted agents cut the honest agents"

    def __str__(self) -> str:
        return "breach"


@dataclass(frozen=True)
class AdversarySpec:
    """The corrupted coalition; ``corrupted`` may be empty but must leave an honest agent."""

    corrupted: frozenset[int]

    @classmethod
    def of(cls, g: Graph, corrupted: Iterable[int] = ()) -> "AdversarySpec":
        bad = frozenset(int(v) for v in corrupted)
        for v in bad:
            if not 1 <= v <= g.n:
                raise InvalidNode(f"corrupted node {v} outside 1..{g.n}")
        if len(bad) == g.n:
            raise EmptyHonestSet("every agent is corrupted")
        return cls(bad)

    def honest(self, g: Graph) -> tuple[int, ...]:
        return tuple(v for v in g.nodes if v not in self.corrupted)

    def corrupt_edges(self, g: Graph) -> tuple[Edge, ...]:
        return tuple(e for e in g.edges if e[0] in self.corrupted or e[1] in self.corrupted)

    def honest_edges(self, g: Graph) -> tuple[Edge, ...]:
        return tuple(e for e in g.edges if e[0] not in self.corrupted and e[1] not in self.corrupted)


@dataclass(frozen=True)
class AdversaryView:
    """Everything the coalition observes after phase one."""

    honest: tuple[int, ...]
    effective_alpha_honest: np.ndarray  # (|H|, m), row order follows ``honest``
    corrupt_edge_noise: Mapping[Edge, np.ndarray]
    corrupted_costs: Mapping[int, QuadraticCost] = field(default_factory=dict)


def assemble_view(
    g: Graph,
    spec: AdversarySpec,
    noise: NoiseTable,
    effective,
    costs: CostSet | None = None,
) -> AdversaryView:
    """Collect the coalition's view: honest effective rows, ``b_e`` on corrupted edges, corrupted costs."""
    effective = np.asarray(effective, dtype=float)
    if effective.shape[0] != g.n or noise.graph != g:
        raise ShapeError("view inputs disagree on the graph")
    if costs is not None and costs.n != g.n:
        raise ShapeError(f"{costs.n} costs for {g.n} agents")
    honest = spec.honest(g)
    if not honest:
        raise EmptyHonestSet("every agent is corrupted")
    rows = np.array([effective[i - 1] for i in honest])
    b = {e: edge_difference(noise, e) for e in spec.corrupt_edges(g)}
    own = {i: costs[i - 1] for i in sorted(spec.corrupted)} if costs is not None else {}
    return AdversaryView(honest, rows, b, own)


def cheeger_bounds(g_h: Graph) -> dict:
    """Vertex-expansion bracket ``(phi^2 / 2, 2 phi)`` around the smallest nonzero eigenvalue.

    Informational only: with the plain (unnormalized) Laplacian the bracket does
    not hold for every graph, and ``holds`` records whether it does here.
    """
    if g_h.n < 2 or not is_connected(g_h):
        raise PrivacyBreach("Cheeger bounds need a connected graph with at least two nodes")
    phi = vertex_expansion(g_h)
    vals = symmetric_eigen(laplacian(g_h)).eigenvalues
    mu = float(vals[vals > zero_cutoff(vals)][-1])
    lower, upper = phi * phi / 2.0, 2.0 * phi
    lower_ok, upper_ok = lower <= mu, mu <= upper
    return {
        "lower": lower,
        "upper": upper,
        "mu_min": mu,
        "phi": phi,
        "lower_holds": lower_ok,
        "upper_holds": upper_ok,
        "holds": lower_ok and upper_ok,
    }


@dataclass
class PrivacyReport:
    corrupted: tuple[int, ...]
    sigma: float
    is_cut: bool
    epsilon: float | Breach
    mu_min_honest: float | None = None
    honest_spectrum: list[float] = field(default_factory=list)
    cheeger_phi: float | None = None
    cheeger: dict | None = None
    note: str | None = None

    @property
    def private(self) -> bool:
        return not isinstance(self.epsilon, Breach)

    def to_dict(self) -> dict:
        cheeger = None
        if self.cheeger is not None:
            cheeger = {k: self.cheeger[k] for k in ("lower", "upper", "holds", "lower_holds", "upper_holds")}
        out = {
            "epsilon": "breach" if isinstance(self.epsilon, Breach) else self.epsilon,
            "mu_min_honest": self.mu_min_honest,
            "spectrum": self.honest_spectrum,
            "phi": self.cheeger_phi,
            "cheeger": cheeger,
            "sigma": self.sigma,
            "corrupted": list(self.corrupted),
            "is_cut": self.is_cut,
        }
        if isinstance(self.epsilon, Breach):
            out["breach_reason"] = self.epsilon.reason
        if self.note:
            out["note"] = self.note
        return out


def _honest_structure(g: Graph, spec: AdversarySpec) -> tuple[InducedGraph, bool]:
    sub = induced_honest_graph(g, spec.corrupted)
    return sub, not is_connected(sub.graph)


def compute_epsilon(g: Graph, spec: AdversarySpec, sigma: float) -> PrivacyReport:
    """Privacy level ``1 / (4 sigma^2 mu(L_H))`` of the masking phase against ``spec``.

    A single honest agent leaves nothing to hide beyond the honest sum the
    coalition already learns; that case reports ``epsilon = 0`` with a note.
    """
    if not sigma > 0:
        raise InvalidSigma(f"sigma must be > 0, got {sigma}")
    sub, cut = _honest_structure(g, spec)
    corrupted = tuple(sorted(spec.corrupted))
    if cut:
        return PrivacyReport(corrupted, float(sigma), True, Breach())
    vals = symmetric_eigen(laplacian(sub.graph)).eigenvalues
    spectrum = [float(v) for v in vals]
    if sub.graph.n == 1:
        return PrivacyReport(
            corrupted, float(sigma), False, 0.0, None, spectrum,
            note="single honest agent: its coefficient equals the honest sum, nothing further to protect",
        )
    nonzero = vals[vals > zero_cutoff(vals)]
    if nonzero.size == 0:
        raise AllZeroSpectrum("connected honest graph with an all-zero spectrum")
    mu = float(nonzero[-1])
    report = PrivacyReport(corrupted, float(sigma), False, 1.0 / (4.0 * sigma**2 * mu), mu, spectrum)
    if sub.graph.n <= MAX_EXHAUSTIVE_NODES:
        report.cheeger = cheeger_bounds(sub.graph)
        report.cheeger_phi = report.cheeger["phi"]
    return report


def analyze(g: Graph, spec: AdversarySpec, sigma: float) -> PrivacyReport:
    """Like :func:`compute_epsilon` but accepts ``sigma == 0``, which offers no privacy at all."""
    if sigma == 0:
        cut = _honest_structure(g, spec)[1]
        return PrivacyReport(
            tuple(sorted(spec.corrupted)), 0.0, cut, Breach("sigma = 0: masks are identically zero")
        )
    return compute_epsilon(g, spec, sigma)


def connectivity_guarantee(g: Graph, t: int) -> bool:
    """True iff ``g`` is (t+1)-connected, so any ``t`` corrupted agents leave the rest connected."""
    if not is_connected(g):
        raise NotConnected("graph is disconnected")
    if t < 0:
        raise InvalidArgument(f"t must be >= 0, got {t}")
    if g.n == 1:
        return t == 0
    return vertex_connectivity(g) >= t + 1


def cut_enumeration_guarantee(g: Graph, t: int) -> bool:
    """Brute-force counterpart of :func:`connectivity_guarantee`: no ``C`` with ``|C| <= t`` is a cut."""
    limit = min(t, g.n - 1)
    return not any(is_vertex_cut(g, c) for k in range(limit + 1) for c in combinations(g.nodes, k))


def distance(alpha, alpha_prime) -> float:
    """Aggregate Euclidean distance over all agents and coordinates."""
    return float(np.linalg.norm(np.asarray(alpha, dtype=float) - np.asarray(alpha_prime, dtype=float)))


def _honest_difference(g: Graph, spec: AdversarySpec, alpha, alpha_prime) -> np.ndarray:
    alpha = np.asarray(alpha, dtype=float).reshape(g.n, -1)
    alpha_prime = np.asarray(alpha_prime, dtype=float).reshape(g.n, -1)
    if alpha.shape != alpha_prime.shape:
        raise ShapeError(f"{alpha.shape} vs {alpha_prime.shape}")
    bad = [i - 1 for i in sorted(spec.corrupted)]
    honest = [i - 1 for i in spec.honest(g)]
    if bad and np.abs(alpha[bad] - alpha_prime[bad]).max() > COEFF_TOL:
        raise IncomparableCoefficients("coefficient sets differ on corrupted agents")
    delta = alpha[honest] - alpha_prime[honest]
    if np.abs(delta.sum(axis=0)).max(initial=0.0) > COEFF_TOL:
        raise IncomparableCoefficients("honest coefficient sums differ")
    return delta


def view_kl_closed_form(g: Graph, spec: AdversarySpec, sigma: float, alpha, alpha_prime) -> float:
    """Exact KL divergence between the coalition's views under ``alpha`` and ``alpha_prime``."""
    if not sigma > 0:
        raise InvalidSigma(f"sigma must be > 0, got {sigma}")
    delta = _honest_difference(g, spec, alpha, alpha_prime)
    sub, cut = _honest_structure(g, spec)
    if cut:
        raise PrivacyBreach("honest graph is disconnected")
    l_pinv = pseudo_inverse(laplacian(sub.graph))
    quad = np.einsum("ik,ij,jk->", delta, l_pinv, delta)
    return float(quad / (4.0 * sigma**2))


@dataclass(frozen=True)
class MonteCarloKL:
    estimate: float
    trials: int
    support_dim: int
    warning: str | None = None


def _gaussian_kl(mu1, cov1, mu2, cov2) -> float:
    d = mu1.size
    if d == 0:
        return 0.0
    inv2 = np.linalg.inv(cov2)
    diff = mu2 - mu1
    _, logdet1 = np.linalg.slogdet(cov1)
    _, logdet2 = np.linalg.slogdet(cov2)
    return 0.5 * (np.trace(inv2 @ cov1) + diff @ inv2 @ diff - d + logdet2 - logdet1)


def _sample_conditioned_views(g, spec, sigma, alpha_col, trials, rng) -> np.ndarray:
    """Honest effective coefficients minus the corrupted-edge contribution the coalition can subtract."""
    shape = (trials, len(g.edges), 1)
    fwd = sigma * rng.standard_normal(shape)
    bwd = sigma * rng.standard_normal(shape)
    masks = neighbor_sum_masks(g, fwd, bwd)[..., 0]
    tilde = alpha_col[None, :] + masks
    nabla = incidence_matrix(g)
    known = np.zeros_like(tilde)
    for k, e in enumerate(g.edges):
        if e[0] in spec.corrupted or e[1] in spec.corrupted:
            b = (bwd - fwd)[:, k, 0]
            known += np.outer(b, nabla[:, k])
    honest = [i - 1 for i in spec.honest(g)]
    return (tilde - known)[:, honest]


def view_kl_monte_carlo(
    g: Graph,
    spec: AdversarySpec,
    sigma: float,
    alpha,
    alpha_prime,
    trials: int = 100_000,
    seed: int = 0,
) -> MonteCarloKL:
    """Estimate the view KL by simulating the protocol and fitting Gaussians to the samples.

    Both views are simulated end to end. The coalition's known ``b_e`` terms are
    subtracted, the residual honest coefficients are projected onto the span of
    their pooled sample covariance, and the Gaussian KL formula is applied to
    the fitted means and covariances in that subspace, one coordinate at a time.
    """
    if trials < 10_000:
        raise InvalidArgument(f"need at least 10^4 trials, got {trials}")
    if not sigma > 0:
        raise InvalidSigma(f"sigma must be > 0, got {sigma}")
    _honest_difference(g, spec, alpha, alpha_prime)
    if _honest_structure(g, spec)[1]:
        raise PrivacyBreach("honest graph is disconnected")
    alpha = np.asarray(alpha, dtype=float).reshape(g.n, -1)
    alpha_prime = np.asarray(alpha_prime, dtype=float).reshape(g.n, -1)
    rng = np.random.default_rng(seed)

    total, dims, warning = 0.0, set(), None
    for k in range(alpha.shape[1]):
        x1 = _sample_conditioned_views(g, spec, sigma, alpha[:, k], trials, rng)
        x2 = _sample_conditioned_views(g, spec, sigma, alpha_prime[:, k], trials, rng)
        pooled = np.cov(np.vstack([x1 - x1.mean(0), x2 - x2.mean(0)]), rowvar=False).reshape(x1.shape[1], -1)
        vals, vecs = np.linalg.eigh(pooled)
        basis = vecs[:, vals > 1e-9 * max(vals.max(initial=0.0), sigma**2)]
        dims.add(basis.shape[1])
        p1, p2 = x1 @ basis, x2 @ basis
        c1 = np.cov(p1, rowvar=False).reshape(basis.shape[1], -1)
        c2 = np.cov(p2, rowvar=False).reshape(basis.shape[1], -1)
        if basis.shape[1] and min(np.linalg.eigvalsh(c1).min(), np.linalg.eigvalsh(c2).min()) <= 0:
            warning = "degenerate empirical covariance"
            continue
        outside = (x1.mean(0) - x2.mean(0)) - basis @ (basis.T @ (x1.mean(0) - x2.mean(0)))
        if np.abs(outside).max(initial=0.0) > 1e-9:
            warning = "mean difference leaves the sample support"
        total += _gaussian_kl(p1.mean(0), c1, p2.mean(0), c2)
    return MonteCarloKL(float(total), trials, max(dims), warning)
