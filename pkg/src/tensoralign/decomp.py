"""SVD, pseudo-inverse and Tucker decomposition (HOSVD / HOOI).

The trailing mode of every tensor handed to :func:`hosvd` or :func:`hooi` is
treated as the sample mode and is never factored.
"""
from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidArgumentError
from .tensor import as_tensor, frobenius_sq, tucker_product, unfold


@dataclass
class SvdResult:
    U: np.ndarray
    S: np.ndarray
    V: np.ndarray


@dataclass
class TuckerResult:
    factors: list
    core: np.ndarray
    fit_trace: list = field(default_factory=list)

    @property
    def ranks(self):
        return tuple(U.shape[1] for U in self.factors)

    def reconstruct(self):
        return tucker_product(self.core, self.factors)


def svd(A):
    """Thin SVD with a deterministic sign convention.

    Each left singular vector is flipped so that its largest-magnitude entry
    (lowest index on ties) is non-negative; the matching right vector is
    flipped with it.
    """
    A = np.asarray(A, dtype=np.float64)
    if A.ndim != 2:
        raise InvalidArgumentError(f"svd expects a matrix, got shape {A.shape}")
    if not np.all(np.isfinite(A)):
        raise InvalidArgumentError("svd input contains non-finite entries")
    U, S, Vt = np.linalg.svd(A, full_matrices=False)
    if U.shape[1]:
        signs = _sign_fix(U)
        U = U * signs
        Vt = Vt * signs[:, None]
    return SvdResult(U=U, S=S, V=Vt.T)


def pinv(A, tol=None):
    """Moore-Penrose pseudo-inverse; singular values ``<= tol`` are dropped.

    The default tolerance is ``max(A.shape) * eps * S[0]``.
    """
    A = np.asarray(A, dtype=np.float64)
    res = svd(A)
    if tol is None:
        smax = res.S[0] if res.S.size else 0.0
        tol = max(A.shape) * np.finfo(np.float64).eps * smax
    elif tol < 0:
        raise InvalidArgumentError("tol must be non-negative")
    keep = res.S > tol
    inv = np.zeros_like(res.S)
    inv[keep] = 1.0 / res.S[keep]
    return (res.V * inv) @ res.U.T


def select_ranks(X, threshold):
    """Per-mode ranks preserving `threshold` of the mode-k spectral energy.

    For every non-sample mode, the rank is the smallest r with
    ``sum(s[:r]**2) / sum(s**2) >= threshold`` where ``s`` are the singular
    values of the mode-k unfolding of `X`.
    """
    if not 0.0 < threshold <= 1.0:
        raise InvalidArgumentError(f"variance threshold must lie in (0, 1], got {threshold}")
    X = as_tensor(X)
    ranks = []
    for k in range(X.ndim - 1):
        s = np.linalg.svd(unfold(X, k), compute_uv=False)
        energy = s**2
        total = energy.sum()
        if total == 0.0:
            ranks.append(1)
            continue
        ratio = np.cumsum(energy) / total
        # 1e-12 slack keeps threshold=1.0 from overshooting on rounding
        r = int(np.searchsorted(ratio, threshold - 1e-12, side="left")) + 1
        ranks.append(min(r, X.shape[k]))
    return tuple(ranks)


def _check_ranks(X, ranks):
    ranks = tuple(int(r) for r in ranks)
    if len(ranks) != X.ndim - 1:
        raise InvalidArgumentError(
            f"expected {X.ndim - 1} ranks for a tensor of shape {X.shape}, got {len(ranks)}"
        )
    for k, r in enumerate(ranks):
        if not 1 <= r <= X.shape[k]:
            raise InvalidArgumentError(f"rank {r} out of range [1, {X.shape[k]}] for mode {k}")
    return ranks


def _fit(X, core):
    norm = frobenius_sq(X)
    if norm == 0.0:
        return 1.0
    return float(np.sqrt(frobenius_sq(core) / norm))


def _sign_fix(U):
    pivot = np.argmax(np.abs(U), axis=0)
    return np.where(U[pivot, np.arange(U.shape[1])] < 0, -1.0, 1.0)


def _leading_vectors(A, r):
    # wide unfoldings: A^T = Q R, so A and R^T share left singular vectors
    if A.shape[1] > A.shape[0]:
        A = np.linalg.qr(A.T, mode="r").T
    U = np.linalg.svd(A, full_matrices=False)[0][:, :r]
    return U * _sign_fix(U)


def _project(X, factors):
    return tucker_product(X, [U.T for U in factors])


def hosvd(X, ranks):
    X = as_tensor(X)
    ranks = _check_ranks(X, ranks)
    factors = [_leading_vectors(unfold(X, k), r) for k, r in enumerate(ranks)]
    core = _project(X, factors)
    return TuckerResult(factors=factors, core=core, fit_trace=[_fit(X, core)])


def hooi(X, ranks, init=None, max_sweeps=20, tol=1e-6):
    """Higher-order orthogonal iteration.

    Parameters
    ----------
    X : ndarray
        Tensor whose last axis is the (unfactored) sample mode.
    ranks : sequence of int
        Target rank for each non-sample mode.
    init : list of ndarray, optional
        Warm-start factors; HOSVD factors are used when absent.
    max_sweeps : int
        Upper bound on full passes over the modes.
    tol : float
        Stop once the relative change of the fit drops below this value.

    Returns
    -------
    TuckerResult
        ``fit_trace[0]`` is the fit of the initial factors, followed by one
        entry per completed sweep.
    """
    X = as_tensor(X)
    ranks = _check_ranks(X, ranks)
    if init is None:
        factors = hosvd(X, ranks).factors
    else:
        factors = [np.array(U, dtype=np.float64) for U in init]
        if [U.shape for U in factors] != [(X.shape[k], r) for k, r in enumerate(ranks)]:
            raise InvalidArgumentError("initial factors do not match tensor extents and ranks")
    core = _project(X, factors)
    fits = [_fit(X, core)]
    K = len(ranks)
    for _ in range(max_sweeps):
        for k in range(K):
            others = [m for m in range(K) if m != k]
            Y = tucker_product(X, [factors[m].T for m in others], others)
            factors[k] = _leading_vectors(unfold(Y, k), ranks[k])
        core = _project(X, factors)
        fits.append(_fit(X, core))
        if abs(fits[-1] - fits[-2]) <= tol * max(abs(fits[-2]), np.finfo(float).tiny):
            break
    return TuckerResult(factors=factors, core=core, fit_trace=fits)
