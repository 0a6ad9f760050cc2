"""Inverse transform: the ∂̄ equation in the spectral variable,

    d mu / d kbar = (1 / 4π kbar) e^{-i(kz + k̄z̄)} b(k) conj(mu),   mu -> 1,

solved as ``mu = 1 + C_k[T conj(mu)]`` with the solid Cauchy transform in
``k``, followed by the reconstruction of ``γ^{1/2}`` and ``v``."""
from __future__ import annotations

import logging

import numpy as np
import scipy.fft as sfft
from scipy.special import erfc

from .conductivity import Potential
from .faddeev import SolverError
from .grid import (ComplexField, GridSpec, cauchy_kernel_hat, embed, symbol,
                   windowed_apply)
from .krylov import batched_gmres
from .scattering import KGrid, ScatteringData, plane_phase

log = logging.getLogger(__name__)


def dbar_rhs(b_k, k, z, mu_bar):
    """``(1 / 4π k̄) e^{-i(kz + k̄z̄)} b_k mu_bar``."""
    k = np.asarray(k, dtype=complex)
    if np.any(k == 0):
        raise ValueError("the ∂̄ coefficient is singular at k = 0")
    return plane_phase(k, -np.asarray(z)) * b_k * mu_bar / (4 * np.pi * np.conj(k))


class KCauchy:
    """Solid Cauchy transform on the nodes of a k-grid (stacked fields)."""

    def __init__(self, kg: KGrid, pad: int = 3):
        self.M = kg.M
        self.npad = pad * kg.M
        self.khat = cauchy_kernel_hat(self.npad, kg.d, np.sqrt(2.0) * kg.M * kg.d)

    def __call__(self, f: np.ndarray) -> np.ndarray:
        M, P = self.M, self.npad
        buf = np.zeros(f.shape[:-2] + (P, P), dtype=complex)
        buf[..., :M, :M] = f
        out = sfft.ifft2(self.khat * sfft.fft2(buf, axes=(-2, -1)), axes=(-2, -1))
        return out[..., :M, :M]


def dbar_coefficient(s: ScatteringData, z: np.ndarray, R: float | None = None) -> np.ndarray:
    """``T(z, k) = e^{-i(kz + k̄z̄)} b(k) / (4π k̄)`` with ``b`` cut off at ``|k| > R``;
    shape ``(len(z), M, M)``."""
    kg = s.kgrid
    k = kg.k
    R = kg.K if R is None else R
    if R <= 0:
        raise ValueError("truncation radius must be positive")
    b = np.where(np.abs(k) <= R, s.b, 0.0)
    z = np.asarray(z, dtype=complex).reshape(-1)
    return plane_phase(k[None], -z[:, None, None]) * (b / (4 * np.pi * np.conj(k)))[None]


def solve_dbar(s: ScatteringData, z, R: float | None = None, *, tol: float = 1e-12,
               restart: int = 40, maxiter: int = 400, chunk: int = 512,
               return_info: bool = False):
    """``mu(z, k)`` on the k-grid for one or many evaluation points ``z``.

    The equation ``mu - C[T conj(mu)] = 1`` is real-linear; it is solved by
    batched GMRES on ``(Re mu, Im mu)``.  Zero data returns exactly 1.

    Returns an array of shape ``(M, M)`` for scalar ``z``, else
    ``(len(z), M, M)``; with ``return_info`` also a diagnostics dict.
    """
    kg = s.kgrid
    M = kg.M
    scalar = np.ndim(z) == 0
    zs = np.atleast_1d(np.asarray(z, dtype=complex)).ravel()
    C = KCauchy(kg)
    out = np.empty((zs.size, M, M), dtype=complex)
    its, worst = 0, 0.0
    for lo in range(0, zs.size, chunk):
        T = dbar_coefficient(s, zs[lo:lo + chunk], R)
        nb = T.shape[0]

        def apply(x):
            mu = (x[:, :M * M] + 1j * x[:, M * M:]).reshape(nb, M, M)
            y = mu - C(T * np.conj(mu))
            y = y.reshape(nb, M * M)
            return np.concatenate([y.real, y.imag], axis=1)

        rhs = np.concatenate([np.ones((nb, M * M)), np.zeros((nb, M * M))], axis=1)
        if not np.any(T):
            out[lo:lo + nb] = 1.0
            continue
        x, info = batched_gmres(apply, rhs, x0=rhs, tol=tol, restart=restart, maxiter=maxiter)
        if not info["converged"]:
            raise SolverError(f"∂̄ solve did not converge (residual "
                              f"{info['residual'].max():.2e})", info["history"])
        its = max(its, info["iterations"])
        worst = max(worst, float(info["residual"].max()))
        out[lo:lo + nb] = (x[:, :M * M] + 1j * x[:, M * M:]).reshape(nb, M, M)
    res = out[0] if scalar else out
    if return_info:
        return res, {"iterations": its, "residual": worst}
    return res


def dbar_residual(s: ScatteringData, z: complex, mu: np.ndarray, R: float | None = None) -> float:
    """Spectral ``d_kbar mu`` minus the right-hand side, relative, on nodes at
    least two spacings inside the truncation disc.

    ``mu - 1`` decays only like ``1/k``, so it is placed on a k-grid of twice
    the width, continued outside the original grid by ``1 + C[T conj(mu)]``
    (holomorphic there), smoothly cut off and differentiated spectrally.
    """
    kg = s.kgrid
    R = kg.K if R is None else R
    T = dbar_coefficient(s, [z], R)[0]
    F = T * np.conj(mu)
    pseudo = GridSpec(kg.K, kg.M)
    ext = GridSpec(2 * kg.K, 2 * kg.M)
    big = KCauchy(KGrid(2 * kg.K, 2 * kg.M, k_min=0.0))(embed(F, pseudo))
    M = kg.M
    big[M // 2:M // 2 + M, M // 2:M // 2 + M] = np.asarray(mu) - 1.0
    dmu = windowed_apply(big, pseudo, symbol(ext, "d_zbar"))
    mask = np.abs(kg.k) <= R - 2 * kg.d
    scale = np.abs(F[mask]).max(initial=0.0)
    if scale == 0.0:
        return float(np.abs(dmu[mask]).max(initial=0.0))
    return float(np.abs(dmu - F)[mask].max() / scale)


def innermost_ring(kg: KGrid) -> np.ndarray:
    a = np.abs(kg.k)
    return np.isclose(a, a.min(), rtol=1e-12, atol=0)


def reconstruct_gamma_sqrt(s: ScatteringData, grid: GridSpec, R: float | None = None,
                           **kw) -> ComplexField:
    """``γ^{1/2}(z)`` read off as ``mu(z, k)`` averaged over the innermost k ring.

    ``meta`` records the imaginary residue, the minimum value and the solver
    diagnostics.
    """
    mu, info = solve_dbar(s, grid.z.ravel(), R, return_info=True, **kw)
    ring = innermost_ring(s.kgrid)
    val = mu[:, ring].mean(axis=1).reshape(grid.N, grid.N)
    re = val.real
    imag = float(np.abs(val.imag).max() / max(np.abs(re).max(), 1e-300))
    out = ComplexField(grid, re, real=True)
    out.meta.update(imag_residue=imag, minimum=float(re.min()), real_ok=imag <= 1e-2,
                    positive=bool(re.min() > 0), **info)
    if imag > 1e-2:
        log.warning("reconstruction has imaginary residue %.2e", imag)
    if re.min() <= 0:
        log.warning("reconstructed conductivity root is not positive (min %.3g)", re.min())
    return out


def reconstruction_window(grid: GridSpec):
    """Smooth cutoff used when differentiating ``mu - 1`` on the grid.

    Returns the window and the radius inside which it equals 1 to 1e-10.
    """
    w = 2.4 * grid.h
    rc = grid.L - 3.3 * w
    W = 0.5 * erfc((np.abs(grid.z) - rc) / w)
    return W, rc - 4.6 * w


def reconstruct_v(mu, k: complex, grid: GridSpec | None = None, *, small: float = 1e-6,
                  max_masked: float = 0.01) -> Potential:
    """``v = (Δ + 4ik d_zbar) mu / mu`` for one ``k``.

    ``mu - 1`` is multiplied by a smooth cutoff before spectral
    differentiation, so ``v`` is only recovered inside the cutoff radius
    (stored in ``meta``); outside it, and where ``|mu| <= small``, ``v`` is set
    to 0.
    """
    if isinstance(mu, ComplexField):
        grid = mu.grid
        mu = mu.values
    mu = np.asarray(mu, dtype=complex)
    tiny = np.abs(mu) <= small
    if tiny.mean() > max_masked:
        raise ArithmeticError(f"|mu| <= {small} on {tiny.mean():.1%} of the nodes")
    W, radius = reconstruction_window(grid)
    if radius <= 0:
        raise ValueError(f"grid with h = {grid.h} is too coarse for the reconstruction window")
    op = symbol(grid, "laplacian") + 4j * k * symbol(grid, "d_zbar")
    Lmu = sfft.ifft2(op * sfft.fft2(W * (mu - 1)))
    inside = (np.abs(grid.z) <= radius) & ~tiny
    v = np.where(inside, Lmu / np.where(tiny, 1, mu), 0)
    scale = np.abs(v.real).max(initial=0.0)
    imag = float(np.abs(v.imag).max() / scale) if scale else 0.0
    p = Potential(ComplexField(grid, v.real, real=True))
    p.meta.update(imag_residue=imag, radius=float(radius), masked=float(tiny.mean()))
    return p


def smooth_noise(kg: KGrid, rng: np.random.Generator, modes: int = 8) -> np.ndarray:
    """Smooth complex random field on the k-plane with unit sup-norm on the grid.

    Built from a few random plane waves of wavelength comparable to the grid
    width, so that it converges under k-grid refinement.  Like scattering data
    of conductivity-type potentials it vanishes at ``k = 0``; otherwise the
    ``1/k̄`` factor would make ``mu`` grow like ``log |k|`` near the origin.
    """
    k = kg.k
    amp = rng.normal(size=modes) + 1j * rng.normal(size=modes)
    freq = rng.normal(size=(modes, 2)) * (np.pi / kg.K)
    f = sum(a * np.exp(1j * (w[0] * k.real + w[1] * k.imag)) for a, w in zip(amp, freq))
    f = f * (np.abs(k) / kg.K) * np.exp(-np.abs(k) ** 2 / kg.K**2)
    return f / np.abs(f).max()


def liouville_certificate(s: ScatteringData, tol: float, *, z=None, grid: GridSpec | None = None,
                          k_index: tuple | None = None, R: float | None = None) -> dict:
    """Quantify "zero data forces mu ≡ 1 and v ≡ 0".

    Requires ``sup |b| <= tol``.  Solves the ∂̄ problem at the sample points
    ``z`` and, when ``grid`` is given, on the whole grid to reconstruct ``v``
    at one k node.  Reports ``sup |mu - 1|`` and ``||v||_inf`` with the
    constants ``C = sup|mu - 1| / sup|b|`` and ``C' = ||v|| / sup|b|``.
    """
    sup_b = s.sup()
    if not sup_b <= tol:
        raise ValueError(f"sup|b| = {sup_b:.3e} exceeds tolerance {tol:.3e}")
    if z is None:
        z = np.array([0, 1 + 0.5j, -2 + 1j, 0.5 - 2j])
    z = np.atleast_1d(np.asarray(z, dtype=complex))
    mu = solve_dbar(s, z, R)
    dev = float(np.abs(mu - 1).max())
    report = {"sup_b": sup_b, "tol": tol, "z": [[c.real, c.imag] for c in z],
              "sup_mu_minus_1": dev,
              "C": dev / sup_b if sup_b else 0.0,
              "exact": bool(sup_b == 0 and dev == 0)}
    if grid is not None:
        kg = s.kgrid
        if k_index is None:
            k_index = tuple(np.argwhere(innermost_ring(kg))[0])
        k = kg.k[k_index]
        muz = solve_dbar(s, grid.z.ravel(), R)[:, k_index[0], k_index[1]]
        p = reconstruct_v(muz.reshape(grid.N, grid.N), k, grid)
        vinf = float(np.abs(p.v.values).max())
        report.update(k=[k.real, k.imag], sup_v=vinf, C_v=vinf / sup_b if sup_b else 0.0,
                      exact=bool(report["exact"] and vinf == 0))
    return report
