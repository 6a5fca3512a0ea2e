"""Tensor domain alignment on oblique and Stiefel manifolds."""

__version__ = "0.1.0"

from .align import (AlignConfig, AlignResult, Variant, align, alignment_loss, domain_features,
                    mmt_diagnostic, transform, variance_reg)
from .manifold import Manifold

__all__ = [
    "AlignConfig",
    "AlignResult",
    "Manifold",
    "Variant",
    "align",
    "alignment_loss",
    "domain_features",
    "mmt_diagnostic",
    "transform",
    "variance_reg",
]
