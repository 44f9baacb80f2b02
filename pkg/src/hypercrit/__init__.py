"""Simulation and analysis toolkit for Poisson random hypergraphs.

Submodules
----------
betas        coefficient vectors and all closed-form critical quantities
hypergraph   Poisson hypergraph sampling and edge-list persistence
collapse     identifiability closure, domains, sequential patching
walk         breadth-first walk over materialized hypergraphs, excursions
sampler      direct simulation of the walk from its sequential law
limits       drifted Brownian limit walk, rescaling, KS and exponent fits
experiments  seeded multi-trial runner and report schema
cli          command-line harness
"""

from ._kernels import backend
from .betas import (BetaParams, BorelModel, classify, critical_profile,
                    eval_beta, t_star, z_curve)
from .collapse import domain, identify, sequential_patch_experiment
from .hypergraph import Hypergraph, load, sample, save
from .sampler import sample_modified_walk, sample_walk, sample_walk_summary
from .walk import WalkTrace, breadth_first_walk, excursions

__version__ = "0.1.0"

__all__ = [
    "BetaParams",
    "BorelModel",
    "Hypergraph",
    "WalkTrace",
    "backend",
    "breadth_first_walk",
    "classify",
    "critical_profile",
    "domain",
    "eval_beta",
    "excursions",
    "identify",
    "load",
    "sample",
    "sample_modified_walk",
    "sample_walk",
    "sample_walk_summary",
    "save",
    "sequential_patch_experiment",
    "t_star",
    "z_curve",
    "__version__",
]
