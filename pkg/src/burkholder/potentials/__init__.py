"""Concrete potential families and their combinations."""

import numpy as np

from ..potential import MappedPotential
from .adagrad import AdaGradPotential, usq
from .matrix import MatrixPotential, doubling_run
from .meta import (CombinedPotential, MetaPotential, combine_convex,
                   combine_min, estimate_increment_bound)
from .param_free import ParamFreePotential, harmonic_prefix
from .vaw import VawPotential

__all__ = [
    "AdaGradPotential", "usq", "MatrixPotential", "doubling_run",
    "MetaPotential", "CombinedPotential", "combine_min", "combine_convex",
    "estimate_increment_bound", "ParamFreePotential", "harmonic_prefix",
    "VawPotential", "standard_families",
]


def standard_families(B=1.0):
    """Small fixed instances of every family, used by verification sweeps."""
    matrix = MatrixPotential(d1=3, d2=2, eta=0.5, r=1.0, L=1.0, B=B)
    ada_member = MappedPotential(
        AdaGradPotential(d=6, variant="l2", L=1.0, B=B),
        feature_fn=lambda x: np.asarray(x, dtype=float).reshape(-1),
        sample_fn=matrix.sample_instance)
    meta = MetaPotential(
        [(matrix, matrix.increment_bound()),
         (ada_member, ada_member.increment_bound())],
        eta=0.25)
    return {
        "param_free_l2": ParamFreePotential(n=16, d=5, B=B),
        "param_free_l4": ParamFreePotential(n=16, d=5, p=4.0, B=B),
        "matrix": matrix,
        "adagrad_l2": AdaGradPotential(d=5, variant="l2", L=1.0, B=B),
        "adagrad_linf": AdaGradPotential(d=5, variant="linf", L=1.0, B=B),
        "vaw": VawPotential(d=3, rho=2.0, lam=1.0, L=4.0 * B, B=B),
        "meta": meta,
    }
