"""Restarted GMRES for many independent real systems at once.

The ∂̄ problem in the k-plane is only real-linear (it involves complex
conjugation), so it is solved in real arithmetic on stacked real and
imaginary parts, vectorised over evaluation points.
"""
from __future__ import annotations

import numpy as np


def batched_gmres(apply, rhs: np.ndarray, x0: np.ndarray | None = None, *, tol: float = 1e-12,
                  restart: int = 40, maxiter: int = 400):
    """Solve ``A x_b = rhs_b`` for every row ``b``.

    Parameters
    ----------
    apply : callable
        Maps a ``(B, n)`` real array to ``(B, n)``; row ``b`` is ``A_b x_b``.
    rhs : (B, n) ndarray
    tol : float
        Relative residual target per row.

    Returns
    -------
    x : (B, n) ndarray
    info : dict
        ``iterations`` (total inner steps), ``residual`` (final relative
        residual per row), ``history`` (max relative residual per step),
        ``converged`` (bool).
    """
    rhs = np.asarray(rhs, dtype=float)
    B, n = rhs.shape
    x = np.zeros_like(rhs) if x0 is None else np.array(x0, dtype=float)
    bnorm = np.linalg.norm(rhs, axis=1)
    bnorm[bnorm == 0] = 1.0
    history = []
    total = 0
    m = min(restart, n)
    while True:
        r = rhs - apply(x)
        beta = np.linalg.norm(r, axis=1)
        rel = beta / bnorm
        if np.all(rel <= tol) or total >= maxiter:
            break
        V = np.zeros((B, m + 1, n))
        H = np.zeros((B, m + 1, m))
        safe = np.where(beta > 0, beta, 1.0)
        V[:, 0] = r / safe[:, None]
        g = np.zeros((B, m + 1))
        g[:, 0] = beta
        for j in range(m):
            w = apply(V[:, j])
            for i in range(j + 1):
                hij = np.einsum("bn,bn->b", w, V[:, i])
                H[:, i, j] = hij
                w -= hij[:, None] * V[:, i]
            hn = np.linalg.norm(w, axis=1)
            H[:, j + 1, j] = hn
            V[:, j + 1] = w / np.where(hn > 0, hn, 1.0)[:, None]
            total += 1
            y, res = _lsq(H[:, :j + 2, :j + 1], g[:, :j + 2])
            history.append(float((res / bnorm).max()))
            if np.all(res <= tol * bnorm) or total >= maxiter:
                break
        x = x + np.einsum("bjn,bj->bn", V[:, :y.shape[1]], y)
    info = {"iterations": total, "residual": rel, "history": history,
            "converged": bool(np.all(rel <= tol))}
    return x, info


def _lsq(H: np.ndarray, g: np.ndarray):
    """Batched ``min ||g - H y||`` through QR; returns ``y`` and residual norms."""
    Q, R = np.linalg.qr(H)
    qg = np.einsum("bij,bi->bj", Q, g)
    d = np.abs(np.einsum("bii->bi", R))
    # rows whose Krylov space has terminated carry zero pivots
    R = R + np.einsum("bi,ij->bij", (d == 0).astype(float), np.eye(R.shape[-1]))
    y = np.linalg.solve(R, qg[..., None])[..., 0]
    res = np.linalg.norm(g - np.einsum("bij,bj->bi", H, y), axis=1)
    return y, res
