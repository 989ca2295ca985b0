"""Pairwise zero-sum masking for private peer-to-peer optimization, with an exact privacy analyzer."""

from .cost_model import CostSet, QuadraticCost, centralized_minimizer, effective_costs
from .errors import MaskoptError, PrivacyBreach, ScenarioError
from .graph import Graph, laplacian, new_graph
from .harness import RunReport, run_protocol, sweep_sigma
from .masking import NoiseTable, compute_masks, inject_noise, sample_pairwise_noise
from .optimizer import OptimizerParams, dgd_run, metropolis_weights
from .privacy import AdversarySpec, Breach, PrivacyReport, compute_epsilon, view_kl_closed_form
from .scenario import Scenario, load_scenario

__version__ = "0.1.0"

__all__ = [
    "AdversarySpec",
    "Breach",
    "CostSet",
    "Graph",
    "MaskoptError",
    "NoiseTable",
    "OptimizerParams",
    "PrivacyBreach",
    "PrivacyReport",
    "QuadraticCost",
    "RunReport",
    "Scenario",
    "ScenarioError",
    "centralized_minimizer",
    "compute_epsilon",
    "compute_masks",
    "dgd_run",
    "effective_costs",
    "inject_noise",
    "laplacian",
    "load_scenario",
    "metropolis_weights",
    "new_graph",
    "run_protocol",
    "sample_pairwise_noise",
    "sweep_sigma",
    "view_kl_closed_form",
]
