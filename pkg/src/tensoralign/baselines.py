"""Vector-space comparison methods operating on vectorized samples."""
from enum import Enum

import numpy as np

from .errors import InvalidArgumentError


class Baseline(str, Enum):
    NA = "na"
    PCA = "pca"
    SA = "sa"
    CORAL = "coral"


def _principal_directions(F, center):
    """Right singular vectors of ``F - center`` plus their energies."""
    _, s, Vt = np.linalg.svd(F - center, full_matrices=False)
    return Vt.T, s**2


def _dim_for_variance(energy, threshold=0.99):
    total = energy.sum()
    if total == 0.0:
        return 1
    ratio = np.cumsum(energy) / total
    return int(np.searchsorted(ratio, threshold - 1e-12)) + 1


def _sym_power(C, power):
    w, V = np.linalg.eigh(C)
    w = np.clip(w, 1e-12, None)
    return (V * w**power) @ V.T


def baseline_align(kind, Fs, Ft, dim=None):
    """Align source/target feature matrices (rows are samples).

    Parameters
    ----------
    kind : Baseline or str
        ``na``, ``pca``, ``sa`` or ``coral``.
    Fs, Ft : ndarray, shapes (N_s, D) and (N_t, D)
    dim : int, optional
        Subspace size for PCA/SA.  Defaults to the number of source principal
        directions holding 99% of the source variance.

    Returns
    -------
    (ndarray, ndarray)
        Transformed source and target features in a common space.
    """
    kind = Baseline(kind)
    Fs = np.asarray(Fs, dtype=np.float64)
    Ft = np.asarray(Ft, dtype=np.float64)
    if Fs.ndim != 2 or Ft.ndim != 2 or Fs.shape[1] != Ft.shape[1]:
        raise InvalidArgumentError(f"feature shapes {Fs.shape} and {Ft.shape} are incompatible")
    D = Fs.shape[1]
    if dim is not None and not 1 <= dim <= D:
        raise InvalidArgumentError(f"dim {dim} out of range [1, {D}]")

    if kind is Baseline.NA:
        return Fs.copy(), Ft.copy()

    if kind is Baseline.CORAL:
        mu_s, mu_t = Fs.mean(axis=0), Ft.mean(axis=0)
        Cs = np.atleast_2d(np.cov(Fs - mu_s, rowvar=False)) + np.eye(D)
        Ct = np.atleast_2d(np.cov(Ft - mu_t, rowvar=False)) + np.eye(D)
        W = _sym_power(Cs, -0.5) @ _sym_power(Ct, 0.5)
        return (Fs - mu_s) @ W + mu_s, Ft.copy()

    mu = Fs.mean(axis=0)
    Ps, energy = _principal_directions(Fs, mu)
    if dim is None:
        dim = _dim_for_variance(energy)
    dim = min(dim, Ps.shape[1])
    Ps = Ps[:, :dim]
    if kind is Baseline.PCA:
        return (Fs - mu) @ Ps, (Ft - mu) @ Ps

    Pt, _ = _principal_directions(Ft, Ft.mean(axis=0))
    if Pt.shape[1] < dim:
        raise InvalidArgumentError(f"target has only {Pt.shape[1]} principal directions, need {dim}")
    Pt = Pt[:, :dim]
    return (Fs - mu) @ Ps @ (Ps.T @ Pt), (Ft - mu) @ Pt
