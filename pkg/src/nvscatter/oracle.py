"""Brute-force reference computations for the test suite.

Nothing here calls the FFT convolution or the Krylov solvers of the main
modules: the kernel, the interpolation and the quadrature are assembled as
explicit matrices or loops.
"""
from __future__ import annotations

import math

import numpy as np

from .conductivity import Potential
from .faddeev import g1, oversampling
from .grid import ComplexField
from .logquad import correction_stencil

DENSE_MAX = 32


def _trig_interp_1d(n: int, s: int) -> np.ndarray:
    """Matrix of trigonometric interpolation from ``n`` to ``s n`` periodic
    nodes, with the Nyquist mode split evenly between ``±n/2``."""
    xf = np.arange(s * n) / s
    xc = np.arange(n)
    t = 2 * np.pi * (xf[:, None] - xc[None, :]) / n
    j = np.arange(-(n // 2) + 1, n // 2)
    D = np.cos(t[..., None] * j).sum(-1) + np.cos(t * (n // 2))
    return D / n


def dense_kernel_matrix(grid, k: complex, oversample: int | None = None) -> np.ndarray:
    """Explicit matrix of ``f -> g_k * f`` (same discretisation as the FFT path)."""
    n = grid.N
    s = oversample or oversampling(grid.h, k)
    hf = grid.h / s
    nf = n * s
    idx = np.arange(nf)
    # kernel between fine source nodes and coarse targets (every s-th fine node)
    tgt = idx[::s]
    d1 = tgt[:, None] - idx[None, :]
    z = hf * (d1[:, None, :, None] + 1j * d1[None, :, None, :])
    Kf = g1(k * z)
    off, w = correction_stencil()
    corr = {}
    for (a, b), wo in zip(off, w):
        corr[(a, b)] = wo * np.exp(-1j * k * hf * (a + 1j * b)) / (2 * np.pi)
    center = (np.euler_gamma + math.log(abs(k)) + math.log(hf)) / (2 * np.pi)
    for i1 in range(n):
        for i2 in range(n):
            Kf[i1, i2, tgt[i1], tgt[i2]] = center
            for (a, b), val in corr.items():
                j1, j2 = tgt[i1] - a, tgt[i2] - b
                if 0 <= j1 < nf and 0 <= j2 < nf:
                    Kf[i1, i2, j1, j2] += val
    Kf = Kf * hf * hf
    P = _trig_interp_1d(n, s)
    # contract fine source axes with the tensor-product interpolation
    G = np.einsum("abjk,jm,kn->abmn", Kf, P, P, optimize=True)
    return G.reshape(n * n, n * n)


def dense_mu(p: Potential, k: complex, oversample: int | None = None) -> ComplexField:
    """Direct solve of ``(I - G diag(v)) mu = 1`` with an explicit kernel matrix."""
    grid = p.grid
    if grid.N > DENSE_MAX:
        raise ValueError(f"dense oracle limited to N <= {DENSE_MAX}")
    v = p.v.values.real.ravel()
    G = dense_kernel_matrix(grid, k, oversample)
    A = np.eye(v.size, dtype=complex) - G * v[None, :]
    mu = np.linalg.solve(A, np.ones(v.size, dtype=complex))
    return ComplexField(grid, mu.reshape(grid.N, grid.N))


def born_series(p: Potential, k: complex, orders: int, *, G: np.ndarray | None = None,
                ratio_max: float = 0.5) -> ComplexField:
    """Partial Neumann sum ``sum_{j <= orders} (G diag v)^j 1``.

    Raises if the ratio of successive term norms exceeds ``ratio_max``;
    the ratios are stored in ``meta["ratios"]``.
    """
    grid = p.grid
    n = grid.N
    v = p.v.values.real.ravel()
    term = np.ones(n * n, dtype=complex)
    total = term.copy()
    ratios = []
    if orders > 0 and np.any(v):
        if G is None:
            G = dense_kernel_matrix(grid, k)
        prev = np.linalg.norm(term)
        for _ in range(orders):
            term = G @ (v * term)
            norm = np.linalg.norm(term)
            ratios.append(norm / prev)
            if len(ratios) > 1 and ratios[-1] > ratio_max:
                raise ArithmeticError(f"Neumann series diverging (ratio {ratios[-1]:.3g})")
            prev = norm
            total += term
    out = ComplexField(grid, total.reshape(n, n))
    out.meta["ratios"] = ratios
    return out


def brute_b(p: Potential, mu, k: complex) -> complex:
    """Plain double loop over nodes of ``e^{i(ky + k̄ȳ)} v mu h^2``."""
    grid = p.grid
    mu = mu.values if isinstance(mu, ComplexField) else np.asarray(mu)
    v = p.v.values
    total = 0j
    h = grid.h
    for m in range(grid.N):
        x1 = -grid.L + m * h
        for n in range(grid.N):
            x2 = -grid.L + n * h
            re_ky = k.real * x1 - k.imag * x2
            total += complex(math.cos(2 * re_ky), math.sin(2 * re_ky)) * v[m, n].real * mu[m, n]
    return total * h * h


def fd_dbar(mu_at, k: complex, delta: float) -> complex:
    """Central difference ``d/dkbar = (d/dk1 + i d/dk2) / 2``."""
    return 0.5 * ((mu_at(k + delta) - mu_at(k - delta)) / (2 * delta)
                  + 1j * (mu_at(k + 1j * delta) - mu_at(k - 1j * delta)) / (2 * delta))


def fd_dbar_residual(mu_at, b_at, z: complex, ks, delta: float = 1e-3) -> dict:
    """Compare finite-difference ``d mu / d kbar`` with the ∂̄ right-hand side.

    Parameters
    ----------
    mu_at : callable
        ``k -> mu(z, k)`` at the fixed point ``z``.
    b_at : callable
        ``k -> b(k)``.
    ks : iterable of complex
        Nodes at which to compare.

    Returns
    -------
    dict with ``max_rel`` (max over nodes of the nodewise relative deviation)
    and ``max_scaled`` (max deviation over the max right-hand side).
    """
    devs, rhss = [], []
    for k in ks:
        fd = fd_dbar(mu_at, k, delta)
        m = mu_at(k)
        rhs = np.exp(-2j * (k * z).real) * b_at(k) * np.conj(m) / (4 * np.pi * np.conj(k))
        devs.append(abs(fd - rhs))
        rhss.append(abs(rhs))
    devs, rhss = np.array(devs), np.array(rhss)
    if rhss.max(initial=0) == 0:
        return {"max_rel": float(devs.max(initial=0)), "max_scaled": float(devs.max(initial=0))}
    with np.errstate(divide="ignore", invalid="ignore"):
        rel = np.where(rhss > 0, devs / rhss, devs)
    return {"max_rel": float(rel.max()), "max_scaled": float(devs.max() / rhss.max())}
