"""Oblique and Stiefel geometry for square alignment matrices.

Oblique: every row has unit Euclidean norm (a product of spheres).
Stiefel: ``M @ M.T == I``.
"""
from enum import Enum

import numpy as np

from .errors import DegenerateStepError, InvalidArgumentError


class Manifold(str, Enum):
    OBLIQUE = "oblique"
    STIEFEL = "stiefel"


def constraint_residual(kind, M):
    """Max-abs violation of the manifold constraint."""
    M = np.asarray(M, dtype=np.float64)
    kind = Manifold(kind)
    if kind is Manifold.OBLIQUE:
        return float(np.max(np.abs(np.linalg.norm(M, axis=1) - 1.0)))
    return float(np.max(np.abs(M @ M.T - np.eye(M.shape[0]))))


def manifold_check(kind, M, tol=1e-10):
    return constraint_residual(kind, M) <= tol


def project_tangent(kind, M, G, check_tol=1e-8):
    """Orthogonal projection of an ambient direction `G` onto the tangent space at `M`."""
    M = np.asarray(M, dtype=np.float64)
    G = np.asarray(G, dtype=np.float64)
    kind = Manifold(kind)
    if M.shape != G.shape:
        raise InvalidArgumentError(f"point {M.shape} and direction {G.shape} differ in shape")
    if not manifold_check(kind, M, check_tol):
        raise InvalidArgumentError(f"point is not on the {kind.value} manifold")
    if kind is Manifold.OBLIQUE:
        return G - np.sum(G * M, axis=1, keepdims=True) * M
    MtG = M.T @ G
    return G - M @ (0.5 * (MtG + MtG.T))


def retract(kind, M, V):
    """Map the tangent step `V` at `M` back onto the manifold.

    Oblique rows are renormalized; Stiefel uses the polar factor of ``M + V``.
    """
    M = np.asarray(M, dtype=np.float64)
    V = np.asarray(V, dtype=np.float64)
    kind = Manifold(kind)
    if M.shape != V.shape:
        raise InvalidArgumentError(f"point {M.shape} and step {V.shape} differ in shape")
    Y = M + V
    if kind is Manifold.OBLIQUE:
        norms = np.linalg.norm(Y, axis=1, keepdims=True)
        if np.any(norms == 0.0) or not np.all(np.isfinite(norms)):
            raise DegenerateStepError("oblique retraction produced a zero or non-finite row")
        return Y / norms
    if not np.all(np.isfinite(Y)):
        raise DegenerateStepError("stiefel retraction received non-finite entries")
    P, S, Qt = np.linalg.svd(Y, full_matrices=False)
    if S[-1] <= S[0] * max(Y.shape) * np.finfo(np.float64).eps:
        raise DegenerateStepError("stiefel retraction of a rank-deficient matrix")
    return P @ Qt
