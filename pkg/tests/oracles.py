"""Independent brute-force reference implementations used by the tests.

These work element by element from index arithmetic and never call into the
package's multilinear helpers.
"""
import itertools

import numpy as np


def layout_offset(index, dims):
    """0-based linear offset of `index` with the first index varying fastest."""
    off, stride = 0, 1
    for i, d in zip(index, dims):
        off += i * stride
        stride *= d
    return off


def unfold_bruteforce(data, dims, k):
    """Mode-k unfolding of the tensor stored as a flat first-index-fastest array."""
    dims = tuple(dims)
    ncols = int(np.prod([d for m, d in enumerate(dims) if m != k]))
    out = np.zeros((dims[k], ncols))
    for idx in itertools.product(*[range(d) for d in dims]):
        col, stride = 0, 1
        for m, (i, d) in enumerate(zip(idx, dims)):
            if m == k:
                continue
            col += i * stride
            stride *= d
        out[idx[k], col] = data[layout_offset(idx, dims)]
    return out


def mode_product_bruteforce(X, A, k):
    out_shape = list(X.shape)
    out_shape[k] = A.shape[0]
    out = np.zeros(out_shape)
    for idx in itertools.product(*[range(d) for d in out_shape]):
        s = 0.0
        for j in range(X.shape[k]):
            src = list(idx)
            src[k] = j
            s += A[idx[k], j] * X[tuple(src)]
        out[idx] = s
    return out


def tucker_bruteforce(X, factors):
    """Full nested-sum evaluation of X x_0 A_0 x_1 A_1 ... over the leading modes."""
    K = len(factors)
    out_shape = [A.shape[0] for A in factors] + list(X.shape[K:])
    out = np.zeros(out_shape)
    for idx in itertools.product(*[range(d) for d in out_shape]):
        s = 0.0
        for src in itertools.product(*[range(d) for d in X.shape[:K]]):
            w = 1.0
            for m in range(K):
                w *= factors[m][idx[m], src[m]]
            s += w * X[tuple(src) + tuple(idx[K:])]
        out[idx] = s
    return out


def rel_err(a, b):
    a, b = np.asarray(a), np.asarray(b)
    den = max(np.linalg.norm(b), np.finfo(float).tiny)
    return float(np.linalg.norm(a - b) / den)


def _vec(X):
    return np.asarray(X, dtype=float).ravel(order="F")


def _kron_operator(mats, n_samples):
    """I_N kron A_{K-1} kron ... kron A_0 acting on first-index-fastest vectors."""
    out = np.eye(n_samples)
    for A in reversed(mats):
        out = np.kron(out, A)
    return out


def _unfolding(X, k):
    return np.reshape(np.moveaxis(X, k, 0), (X.shape[k], -1), order="F")


def literal_taisl(Xs, Xt, M, U):
    """Source-only-projected loss, regularizer and per-mode gradients.

    Everything is written with explicit Kronecker products on vectorized
    tensors, so it shares no code path with the package.  Returns
    ``(J, h, grads_J, grads_h)`` where the gradients take the reconstruction
    of the projected source as fixed and freeze ``pinv(M_k)``.
    """
    K = len(M)
    Ns, Nt = Xs.shape[-1], Xt.shape[-1]
    xs, xt = _vec(Xs), _vec(Xt)
    P = [u @ u.T for u in U]
    zs = _kron_operator(M, Ns) @ xs
    Ps, Pt = _kron_operator(P, Ns), _kron_operator(P, Nt)
    J = np.sum((zs - Ps @ zs) ** 2) + np.sum((xt - Pt @ xt) ** 2)
    Minv = [np.linalg.pinv(m) for m in M]
    back = _kron_operator([a @ m for a, m in zip(Minv, M)], Ns) @ xs
    h = np.sum((back - xs) ** 2)

    xhat = np.reshape(Ps @ zs, Xs.shape, order="F")
    grads_J, grads_h = [], []
    for k in range(K):
        A = _unfolding(Xs, k)
        others = [M[m] if m != k else np.eye(M[k].shape[0]) for m in range(K)]
        # columns of the mode-k unfolding enumerate the remaining modes first-fastest
        B = _kron_operator([o for m, o in enumerate(others) if m != k], Ns)
        Ahat = _unfolding(xhat, k)
        grads_J.append(2.0 * (M[k] @ A @ B.T - Ahat) @ B @ A.T)
        grads_h.append(-Minv[k].T @ (A @ A.T))
    return J, h, grads_J, grads_h
