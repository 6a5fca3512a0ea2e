"""Tensor domain alignment by alternating minimization.

The objective couples per-mode square alignment matrices ``M = [M_0, ...]``
(kept on the oblique or Stiefel manifold) with a shared orthonormal Tucker
subspace ``U = [U_0, ...]``::

    J(M, U) = ||Z_s - Z_s x U U^T||^2 + ||Z_t - Z_t x U U^T||^2
    h(M)    = ||X_s x M^+ M - X_s||^2 + ||X_t x M^+ M - X_t||^2

with ``Z = X x M``.  The subspace step is HOOI on the concatenation of the
projected domains; the alignment step is one Riemannian gradient step per
mode.  The variants switch off pieces of this objective:

========  =================  =================  ==================
variant   source uses M      target uses M      regularizer terms
========  =================  =================  ==================
ntsl      no (M frozen = I)  no                 none
taisl     yes                no                 source
etaisl    yes                no                 source
tda       yes                yes                source + target
========  =================  =================  ==================
"""
import logging
from dataclasses import asdict, dataclass, field
from enum import Enum

import numpy as np

from .decomp import hooi, hosvd, pinv, select_ranks
from .errors import DivergenceError, InvalidArgumentError
from .manifold import Manifold, constraint_residual, project_tangent, retract
from .tensor import as_tensor, concat_last, frobenius_sq, mode_product, tucker_product, unfold

log = logging.getLogger(__name__)


class Variant(str, Enum):
    NTSL = "ntsl"
    TAISL = "taisl"
    ETAISL = "etaisl"
    TDA = "tda"

    @property
    def projects_source(self):
        return self is not Variant.NTSL

    @property
    def projects_target(self):
        return self is Variant.TDA


# CLI method name -> (variant, manifold)
METHODS = {
    "ntsl": (Variant.NTSL, Manifold.STIEFEL),
    "taisl": (Variant.TAISL, Manifold.STIEFEL),
    "etaisl-s": (Variant.ETAISL, Manifold.STIEFEL),
    "etaisl-o": (Variant.ETAISL, Manifold.OBLIQUE),
    "tda-s": (Variant.TDA, Manifold.STIEFEL),
    "tda-o": (Variant.TDA, Manifold.OBLIQUE),
}


@dataclass
class AlignConfig:
    """Hyper-parameters of :func:`align`.

    ``manifold=None`` resolves to Stiefel for ntsl/taisl and oblique for
    etaisl/tda.  Explicit ``ranks`` take precedence over
    ``variance_threshold``, which is applied to the source tensor.
    """

    variant: Variant = Variant.TDA
    manifold: Manifold | None = None
    lam: float = 1e-4
    step_size: float = 1e-6
    outer_iters: int = 80
    ranks: tuple | None = None
    variance_threshold: float = 0.99
    hooi_max_sweeps: int = 20
    hooi_tol: float = 1e-6
    seed: int = 0
    track_metrics: bool = True
    backtracking: bool = False

    def __post_init__(self):
        self.variant = Variant(self.variant)
        if self.manifold is not None:
            self.manifold = Manifold(self.manifold)
        if self.outer_iters < 1:
            raise InvalidArgumentError("outer_iters must be >= 1")
        if self.lam < 0:
            raise InvalidArgumentError("lambda must be non-negative")
        if not self.step_size > 0:
            raise InvalidArgumentError("step size must be positive")
        if not 0.0 < self.variance_threshold <= 1.0:
            raise InvalidArgumentError("variance threshold must lie in (0, 1]")
        if self.hooi_max_sweeps < 0:
            raise InvalidArgumentError("hooi_max_sweeps must be >= 0")
        if self.ranks is not None:
            self.ranks = tuple(int(r) for r in self.ranks)

    @classmethod
    def for_method(cls, method, **kwargs):
        variant, manifold = METHODS[method]
        return cls(variant=variant, manifold=manifold, **kwargs)

    @property
    def resolved_manifold(self):
        if self.manifold is not None:
            return self.manifold
        if self.variant in (Variant.NTSL, Variant.TAISL):
            return Manifold.STIEFEL
        return Manifold.OBLIQUE

    def to_dict(self):
        d = asdict(self)
        d["variant"] = self.variant.value
        d["manifold"] = self.resolved_manifold.value
        d["ranks"] = list(self.ranks) if self.ranks is not None else None
        return d


@dataclass
class AlignResult:
    M: list
    U: list
    ranks: tuple
    loss_trace: list = field(default_factory=list)
    j_trace: list = field(default_factory=list)
    h_trace: list = field(default_factory=list)
    iterations_run: int = 0
    diagnostics: list = field(default_factory=list)

    def iterations_to_within(self, frac=0.05):
        """First iteration whose loss lies within ``frac`` of the final loss."""
        final = self.loss_trace[-1]
        for i, v in enumerate(self.loss_trace):
            if abs(v - final) <= frac * abs(final):
                return i
        return len(self.loss_trace) - 1


def _check_pair(Xs, Xt):
    Xs, Xt = as_tensor(Xs), as_tensor(Xt)
    if Xs.ndim < 2 or Xs.ndim != Xt.ndim or Xs.shape[:-1] != Xt.shape[:-1]:
        raise InvalidArgumentError(
            f"source {Xs.shape} and target {Xt.shape} must share all non-sample extents"
        )
    return Xs, Xt


def _check_projection(M, dims):
    if len(M) != len(dims) or any(np.shape(m) != (d, d) for m, d in zip(M, dims)):
        raise InvalidArgumentError(
            f"alignment matrices {[np.shape(m) for m in M]} do not match extents {dims}"
        )


def _check_subspace(U, dims):
    if len(U) != len(dims) or any(
        np.ndim(u) != 2 or np.shape(u)[0] != d or not 1 <= np.shape(u)[1] <= d
        for u, d in zip(U, dims)
    ):
        raise InvalidArgumentError(
            f"subspace factors {[np.shape(u) for u in U]} do not match extents {dims}"
        )


def project_domains(Xs, Xt, M, variant):
    """Return ``(Z_s, Z_t)``, the domains after the variant's M-projection."""
    variant = Variant(variant)
    Zs = tucker_product(Xs, M) if variant.projects_source else as_tensor(Xs)
    Zt = tucker_product(Xt, M) if variant.projects_target else as_tensor(Xt)
    return Zs, Zt


def reconstruct(Z, U):
    """``[[ [[Z; U^T]]; U ]]``, the projection of `Z` onto the Tucker subspace."""
    return tucker_product(Z, [u @ u.T for u in U])


def alignment_loss(Xs, Xt, M, U, variant):
    Xs, Xt = _check_pair(Xs, Xt)
    dims = Xs.shape[:-1]
    _check_subspace(U, dims)
    if Variant(variant).projects_source:
        _check_projection(M, dims)
    Zs, Zt = project_domains(Xs, Xt, M, variant)
    return frobenius_sq(Zs - reconstruct(Zs, U)) + frobenius_sq(Zt - reconstruct(Zt, U))


def _pinv_composites(M):
    return [pinv(m) @ m for m in M]


def variance_reg(Xs, Xt, M, variant):
    """Energy lost when each domain is pushed through ``M`` and back through ``M^+``."""
    variant = Variant(variant)
    if variant is Variant.NTSL:
        return 0.0
    Xs, Xt = _check_pair(Xs, Xt)
    _check_projection(M, Xs.shape[:-1])
    P = _pinv_composites(M)
    value = frobenius_sq(tucker_product(Xs, P) - Xs)
    if variant.projects_target:
        value += frobenius_sq(tucker_product(Xt, P) - Xt)
    return value


def objective(Xs, Xt, M, U, variant, lam):
    """``(J + lam * h, J, h)``."""
    J = alignment_loss(Xs, Xt, M, U, variant)
    h = variance_reg(Xs, Xt, M, variant)
    return J + lam * h, J, h


def _partial_projection(X, M, k):
    """``X`` multiplied by every ``M[m]`` except mode `k`."""
    others = [m for m in range(len(M)) if m != k]
    return tucker_product(X, [M[m] for m in others], others)


def _grad_from_partial(Y, Mk, Xhat, k):
    Yk = unfold(Y, k)
    return 2.0 * (Mk @ Yk - unfold(Xhat, k)) @ Yk.T


def _grad_J_term(k, X, Xhat, M):
    # X_(k) times the Kronecker of the other factors, without forming it
    return _grad_from_partial(_partial_projection(X, M, k), M[k], Xhat, k)


def grad_J_mode(k, Xs, Xt, Xhat_s, Xhat_t, M, variant):
    """Euclidean gradient of the mode-k alignment loss w.r.t. ``M[k]``.

    ``Xhat_s`` / ``Xhat_t`` are the Tucker reconstructions, held fixed.  The
    target term only enters for variants that project the target.
    """
    variant = Variant(variant)
    if not variant.projects_source:
        return np.zeros_like(np.asarray(M[k], dtype=np.float64))
    g = _grad_J_term(k, Xs, Xhat_s, M)
    if variant.projects_target:
        g = g + _grad_J_term(k, Xt, Xhat_t, M)
    return g


def grad_h_mode(Xs_k, Xt_k, Mk, variant):
    """Gradient of the mode-k trace regularizer with ``C = pinv(Mk)`` frozen.

    ``-(tr(Xs^T C Mk Xs) + tr(Xt^T C Mk Xt))`` differentiates to
    ``-C^T (Xs Xs^T + Xt Xt^T)``.  Arguments are mode-k unfoldings.
    """
    variant = Variant(variant)
    Mk = np.asarray(Mk, dtype=np.float64)
    if not variant.projects_source:
        return np.zeros_like(Mk)
    scatter = Xs_k @ Xs_k.T
    if variant.projects_target:
        scatter = scatter + Xt_k @ Xt_k.T
    return -pinv(Mk).T @ scatter


def update_subspace(Zs, Zt, ranks, prev, cfg):
    """Refit the shared subspace to the concatenated projected domains."""
    result = hooi(
        concat_last(Zs, Zt),
        ranks,
        init=prev,
        max_sweeps=cfg.hooi_max_sweeps,
        tol=cfg.hooi_tol,
    )
    return result.factors


def _alignment_sweep(Xs, Xt, M, U, cfg, step):
    variant, kind = cfg.variant, cfg.resolved_manifold
    M = [np.array(m, dtype=np.float64) for m in M]
    domains = [Xs, Xt] if variant.projects_target else [Xs]
    for k in range(len(M)):
        E = np.zeros_like(M[k])
        for X in domains:
            Y = _partial_projection(X, M, k)
            Xhat = reconstruct(mode_product(Y, M[k], k), U)
            E += _grad_from_partial(Y, M[k], Xhat, k)
        if cfg.lam:
            E += cfg.lam * grad_h_mode(unfold(Xs, k), unfold(Xt, k), M[k], variant)
        R = project_tangent(kind, M[k], E)
        M[k] = retract(kind, M[k], -step * R)
    return M


def update_alignment(Xs, Xt, M, U, cfg):
    """One Riemannian gradient step per mode, lowest mode first.

    Each mode sees the already-updated matrices of the modes before it.
    With ``cfg.backtracking`` the step is halved (at most 20 times) until the
    objective does not increase; if none of the trial steps helps, `M` is
    returned unchanged.
    """
    if not cfg.variant.projects_source:
        return [np.array(m, dtype=np.float64) for m in M]
    if not cfg.backtracking:
        return _alignment_sweep(Xs, Xt, M, U, cfg, cfg.step_size)
    f0 = objective(Xs, Xt, M, U, cfg.variant, cfg.lam)[0]
    step = cfg.step_size
    for _ in range(21):
        cand = _alignment_sweep(Xs, Xt, M, U, cfg, step)
        if objective(Xs, Xt, cand, U, cfg.variant, cfg.lam)[0] <= f0:
            return cand
        step *= 0.5
    return [np.array(m, dtype=np.float64) for m in M]


def align(Xs, Xt, cfg=None, callback=None):
    """Learn alignment matrices and a shared subspace for two sample tensors.

    Parameters
    ----------
    Xs, Xt : ndarray
        Source and target tensors; the last axis indexes samples.
    cfg : AlignConfig, optional
    callback : callable, optional
        Called as ``callback(iteration, M, U)`` after initialization
        (iteration 0) and after every outer iteration.

    Returns
    -------
    AlignResult
    """
    cfg = cfg or AlignConfig()
    Xs, Xt = _check_pair(Xs, Xt)
    dims = Xs.shape[:-1]
    if cfg.ranks is not None:
        ranks = cfg.ranks
        if len(ranks) != len(dims) or any(not 1 <= r <= d for r, d in zip(ranks, dims)):
            raise InvalidArgumentError(f"ranks {ranks} invalid for extents {dims}")
    else:
        ranks = select_ranks(Xs, cfg.variance_threshold)
    variant, kind = cfg.variant, cfg.resolved_manifold

    M = [np.eye(d) for d in dims]
    Zs, Zt = project_domains(Xs, Xt, M, variant)
    U = hosvd(concat_last(Zs, Zt), ranks).factors
    loss, J, h = objective(Xs, Xt, M, U, variant, cfg.lam)
    if not np.isfinite(loss):
        raise DivergenceError(0, loss)
    result = AlignResult(M=M, U=U, ranks=tuple(ranks),
                         loss_trace=[loss], j_trace=[J], h_trace=[h])
    if callback is not None:
        callback(0, M, U)

    for it in range(1, cfg.outer_iters + 1):
        diag = {}
        if cfg.track_metrics:
            diag["loss_before_subspace"] = alignment_loss(Xs, Xt, M, U, variant)
        U = update_subspace(Zs, Zt, ranks, U, cfg)
        if cfg.track_metrics:
            diag["loss_after_subspace"] = alignment_loss(Xs, Xt, M, U, variant)
        if variant is not Variant.NTSL:
            M = update_alignment(Xs, Xt, M, U, cfg)
        Zs, Zt = project_domains(Xs, Xt, M, variant)
        loss, J, h = objective(Xs, Xt, M, U, variant, cfg.lam)
        if not np.isfinite(loss):
            raise DivergenceError(it, loss)
        result.loss_trace.append(loss)
        result.j_trace.append(J)
        result.h_trace.append(h)
        if cfg.track_metrics:
            diag["m_residual"] = max(constraint_residual(kind, m) for m in M)
            diag["u_residual"] = max(
                float(np.max(np.abs(u.T @ u - np.eye(u.shape[1])))) for u in U
            )
            result.diagnostics.append(diag)
        log.debug("iter %d loss %.6e (J %.6e, h %.6e)", it, loss, J, h)
        if callback is not None:
            callback(it, M, U)

    result.M, result.U, result.iterations_run = M, U, cfg.outer_iters
    return result


def transform(X, M, U, project_with_M):
    """Core-tensor features ``[[ [[X; M]]; U^T ]]`` (or ``[[X; U^T]]``)."""
    X = as_tensor(X)
    Z = tucker_product(X, M) if project_with_M else X
    return tucker_product(Z, [u.T for u in U])


def domain_features(Xs, Xt, M, U, variant):
    """Source and target core tensors as the variant prescribes."""
    variant = Variant(variant)
    return (transform(Xs, M, U, variant.projects_source),
            transform(Xt, M, U, variant.projects_target))


def mmt_diagnostic(M, k):
    Mk = np.asarray(M[k], dtype=np.float64)
    return Mk @ Mk.T
