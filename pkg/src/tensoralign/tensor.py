"""Dense multilinear primitives.

Tensors are plain ``numpy.ndarray`` objects of float64.  Unfoldings follow the
Kolda-Bader convention: the columns of the mode-``k`` unfolding enumerate the
remaining indices with the *first* index varying fastest.  Modes are 0-based.
By convention the last axis of a data tensor is the sample axis.
"""
from functools import reduce

import numpy as np

from .errors import InvalidArgumentError


def _check_mode(ndim, k):
    if not 0 <= k < ndim:
        raise InvalidArgumentError(f"mode {k} out of range for a tensor of order {ndim}")


def as_tensor(X):
    X = np.asarray(X, dtype=np.float64)
    if X.ndim == 0:
        X = X.reshape(1)
    return X


def unfold(X, k):
    """Mode-`k` unfolding, shape ``(d_k, prod of the other extents)``.

    Parameters
    ----------
    X : ndarray
    k : int
        0-based mode index.

    Returns
    -------
    ndarray
        Column ``j`` corresponds to the multi-index obtained by enumerating
        the other modes with the lowest mode varying fastest.
    """
    X = as_tensor(X)
    _check_mode(X.ndim, k)
    return np.reshape(np.moveaxis(X, k, 0), (X.shape[k], -1), order="F")


def fold(A, k, dims):
    """Inverse of :func:`unfold`."""
    A = np.asarray(A, dtype=np.float64)
    dims = tuple(int(d) for d in dims)
    _check_mode(len(dims), k)
    rest = int(np.prod([d for i, d in enumerate(dims) if i != k], dtype=np.int64))
    if A.ndim != 2 or A.shape != (dims[k], rest):
        raise InvalidArgumentError(
            f"matrix of shape {A.shape} cannot be folded into mode {k} of {dims}"
        )
    moved = (dims[k],) + tuple(d for i, d in enumerate(dims) if i != k)
    return np.moveaxis(np.reshape(A, moved, order="F"), 0, k)


def mode_product(X, A, k):
    """Mode-`k` product ``X x_k A``; the extent of mode `k` becomes ``A.shape[0]``."""
    X = as_tensor(X)
    A = np.asarray(A, dtype=np.float64)
    _check_mode(X.ndim, k)
    if A.ndim != 2 or A.shape[1] != X.shape[k]:
        raise InvalidArgumentError(
            f"factor of shape {A.shape} incompatible with mode {k} of extent {X.shape[k]}"
        )
    return np.moveaxis(np.tensordot(A, X, axes=(1, k)), 0, k)


def tucker_product(X, factors, modes=None):
    """Apply ``factors[i]`` along ``modes[i]`` for every i.

    ``modes`` defaults to ``0..len(factors)-1``, i.e. every mode except the
    trailing sample mode when ``len(factors) == X.ndim - 1``.
    """
    if modes is None:
        modes = range(len(factors))
    modes = list(modes)
    if len(modes) != len(factors):
        raise InvalidArgumentError("need exactly one factor per listed mode")
    if len(set(modes)) != len(modes):
        raise InvalidArgumentError(f"modes must be distinct, got {modes}")
    Y = as_tensor(X)
    for A, k in zip(factors, modes):
        Y = mode_product(Y, A, k)
    return Y


def kron_except(mats, k, n_samples=1):
    """``I_N kron M_{K-1} kron ... kron M_{k+1} kron M_{k-1} kron ... kron M_0``.

    With this ordering ``unfold(tucker_product(X, mats), k) ==
    mats[k] @ unfold(X, k) @ kron_except(mats, k, N).T`` for a tensor whose
    trailing mode has extent ``N``.  Materializes the full Kronecker matrix, so
    only use it on small problems.
    """
    if n_samples < 1:
        raise InvalidArgumentError("n_samples must be >= 1")
    _check_mode(len(mats), k)
    others = [np.asarray(m, dtype=np.float64) for i, m in enumerate(mats) if i != k]
    chain = [np.eye(n_samples)] + others[::-1]
    return reduce(np.kron, chain)


def concat_last(Xa, Xb):
    """Stack two sample tensors along the trailing (sample) mode, `Xa` first."""
    Xa, Xb = as_tensor(Xa), as_tensor(Xb)
    if Xa.ndim != Xb.ndim or Xa.shape[:-1] != Xb.shape[:-1]:
        raise InvalidArgumentError(
            f"cannot concatenate tensors of shapes {Xa.shape} and {Xb.shape}"
        )
    return np.concatenate([Xa, Xb], axis=-1)


def frobenius_sq(X):
    X = np.asarray(X, dtype=np.float64)
    return float(np.vdot(X, X))


def vectorize_samples(X):
    """``N x D`` matrix whose row ``n`` is sample ``n`` flattened first-index-fastest."""
    X = as_tensor(X)
    if X.ndim < 2:
        raise InvalidArgumentError("need at least one feature mode plus a sample mode")
    return unfold(X, X.ndim - 1)


def unvectorize_samples(F, dims):
    """Inverse of :func:`vectorize_samples` for feature extents `dims`."""
    F = np.asarray(F, dtype=np.float64)
    return fold(F, len(dims), tuple(dims) + (F.shape[0],))
