"""Faddeev exponentially growing solutions at zero energy.

Writing ``psi = e^{ikz} mu`` turns ``(-Δ + v) psi = 0`` into

    (Δ + 4ik d_zbar) mu = v mu,     mu -> 1 at infinity,

whose free-space Green's function is ``g_k(z) = g_1(kz)`` with

    g_1(z) = -(1/2π) e^{-iz} Re E1(-iz).

The Lippmann-Schwinger equation ``mu = 1 + g_k * (v mu)`` is discretised with
pointwise kernel samples and a corrected trapezoid rule for the logarithmic
singularity of ``g_k`` (see :mod:`nvscatter.logquad`).  When ``h|k|`` is large
the convolution is evaluated on a uniformly refined copy of the grid, with the
source trigonometrically interpolated.
"""
from __future__ import annotations

import hashlib
import logging
import math
from dataclasses import dataclass, field

import numpy as np
import scipy.fft as sfft
from scipy.sparse.linalg import LinearOperator, gmres
from scipy.special import erfc, exp1

from .conductivity import Potential
from .grid import ComplexField, GridSpec, fourier_upsample, symbol
from .logquad import correction_stencil

log = logging.getLogger(__name__)

K_MIN = 0.1
#: largest h|k| on the convolution grid
KAPPA_MAX = 0.4
#: smallest refinement of the convolution grid; sources are interpolated,
#: which removes the trapezoid error from their near-Nyquist content
MIN_OVERSAMPLE = 2
#: admissible |k| as a fraction of xi_max; the factor e^{-i(kz + k̄z̄)} carried
#: by mu oscillates with frequency 2|k|, which must stay below 0.9 xi_max
K_RESOLUTION = 0.45


class SolverError(RuntimeError):
    """Krylov iteration failed to converge; ``history`` holds residual norms."""

    def __init__(self, msg, history=()):
        super().__init__(msg)
        self.history = list(history)


class ResonanceError(ValueError):
    pass


def check_k(k: complex, grid: GridSpec | None = None, k_min: float = K_MIN) -> complex:
    """Validate a spectral parameter against ``k_min`` and grid resolution."""
    k = complex(k)
    if not np.isfinite(k.real) or not np.isfinite(k.imag):
        raise ValueError(f"k must be finite, got {k}")
    if abs(k) < k_min:
        raise ValueError(f"|k| = {abs(k):.3g} below k_min = {k_min}")
    if grid is not None and abs(k) > K_RESOLUTION * grid.xi_max:
        raise ValueError(f"|k| = {abs(k):.3g} not resolved on grid with h = {grid.h}")
    return k


def faddeev_multiplier(xi1, xi2, k: complex, guard: float = 1e-8):
    """Symbol ``-1 / (|xi|^2 + 2k xi_c)`` of the inverse of ``Δ + 4ik d_zbar``."""
    xc = np.asarray(xi1) + 1j * np.asarray(xi2)
    den = xc * (np.conj(xc) + 2 * k)
    if np.any(np.abs(den) < guard):
        raise ResonanceError("frequency lattice hits a zero of the Faddeev symbol")
    return -1.0 / den


def half_shifted_multiplier(grid: GridSpec, k: complex) -> np.ndarray:
    """Multiplier sampled on the frequency lattice shifted by half a step."""
    dxi = np.pi / grid.L
    xi = grid.xi + 0.5 * dxi
    return faddeev_multiplier(xi[:, None], xi[None, :], k)


def g1(z):
    """Green's function at ``k = 1`` away from the origin."""
    z = np.asarray(z, dtype=complex)
    with np.errstate(all="ignore"):
        return -np.exp(-1j * z) * np.real(exp1(-1j * z)) / (2 * np.pi)


def faddeev_greens(grid: GridSpec, k: complex) -> ComplexField:
    """Samples of ``g_k`` at the nodes of ``grid``.

    The node at the origin (when present) carries the regular part
    ``(γ + log|k|) / 2π`` of ``g_k - e^{-ikz} log|z| / 2π``.
    """
    k = check_k(k)
    z = grid.z
    vals = g1(k * z)
    at0 = np.abs(z) == 0
    vals[at0] = (np.euler_gamma + math.log(abs(k))) / (2 * np.pi)
    return ComplexField(grid, vals)


def oversampling(h: float, k: complex, kappa_max: float = KAPPA_MAX,
                 minimum: int = MIN_OVERSAMPLE) -> int:
    """Refinement factor ``s`` of the convolution grid with ``h|k|/s <= kappa_max``."""
    return max(minimum, math.ceil(h * abs(k) / kappa_max - 1e-12))


def kernel_samples(n: int, h: float, k: complex) -> np.ndarray:
    """Quadrature-corrected kernel on offsets ``m h``, ``-n <= m1, m2 < n``.

    The array is centred: offset zero sits at index ``[n, n]``.
    """
    m = np.arange(-n, n)
    x = h * (m[:, None] + 1j * m[None, :])
    K = g1(k * x)
    K[n, n] = (np.euler_gamma + math.log(abs(k)) + math.log(h)) / (2 * np.pi)
    off, w = correction_stencil()
    phase = np.exp(-1j * k * h * (off[:, 0] + 1j * off[:, 1]))
    np.add.at(K, (n + off[:, 0], n + off[:, 1]), w * phase / (2 * np.pi))
    return K * (h * h)


class GreenOperator:
    """Discrete free-space convolution ``f -> g_k * f`` on a grid.

    Parameters
    ----------
    grid : GridSpec
    k : complex
    oversample : int, optional
        Refinement factor of the convolution grid; chosen from ``h|k|`` when
        omitted.
    """

    def __init__(self, grid: GridSpec, k: complex, oversample: int | None = None,
                 kappa_max: float = KAPPA_MAX, workers: int = 1,
                 samples: np.ndarray | None = None):
        self.grid = grid
        self.k = complex(k)
        self.s = oversample or oversampling(grid.h, k, kappa_max)
        self.workers = workers
        nf = grid.N * self.s
        self.nf = nf
        if samples is None:
            K = kernel_samples(nf, grid.h / self.s, self.k)
        else:
            # centred samples of a wider stencil: keep the inner block
            c = samples.shape[0] // 2
            K = samples[c - nf:c + nf, c - nf:c + nf]
        self.samples = K
        self.khat = sfft.fft2(sfft.ifftshift(K), workers=workers)

    def __call__(self, f: np.ndarray) -> np.ndarray:
        nf, s = self.nf, self.s
        f = np.asarray(f, dtype=complex)
        ff = fourier_upsample(f, s)
        buf = np.zeros(f.shape[:-2] + (2 * nf, 2 * nf), dtype=complex)
        buf[..., :nf, :nf] = ff
        out = sfft.ifft2(self.khat * sfft.fft2(buf, axes=(-2, -1), workers=self.workers),
                         axes=(-2, -1), workers=self.workers)
        return out[..., :nf:s, :nf:s]

    def matrix(self) -> np.ndarray:
        """Dense ``N^2 x N^2`` matrix of the operator (small grids only)."""
        n = self.grid.N
        eye = np.eye(n * n, dtype=complex).reshape(n * n, n, n)
        cols = np.stack([self(e) for e in eye])
        return cols.reshape(n * n, n * n).T


@dataclass
class FaddeevField:
    """``mu(., k)`` for one spectral parameter together with diagnostics."""

    k: complex
    mu: ComplexField
    potential_hash: str
    diagnostics: dict = field(default_factory=dict)

    @property
    def accepted(self) -> bool:
        d = self.diagnostics
        return bool(d.get("pde_ok", True) and d.get("boundary_ok", True))


def window_residual(grid: GridSpec, k: complex, source: np.ndarray, mu: np.ndarray,
                    oversample: int | None = None, interior: float = 0.5,
                    samples: np.ndarray | None = None) -> np.ndarray:
    """Residual field ``(Δ + 4ik d_zbar) mu - v mu`` on the interior box.

    ``source`` is ``v mu``.  The correction ``mu - 1 = g_k * (v mu)`` is
    re-evaluated on a grid of twice the width, smoothly cut off well outside
    the data box and differentiated spectrally there; the constant 1 is
    annihilated exactly.  Returns values on ``grid`` nodes inside the box
    ``|x1|, |x2| <= interior * L`` (NaN elsewhere).
    """
    n = grid.N
    ext = GridSpec(2 * grid.L, 2 * n)
    s = oversample or oversampling(grid.h, k)
    G = GreenOperator(ext, k, oversample=s, samples=samples)
    src = np.zeros((2 * n, 2 * n), dtype=complex)
    sl = slice(n // 2, n // 2 + n)
    src[sl, sl] = source
    u = G(src)
    W = 0.5 * erfc((np.abs(ext.z) - 1.375 * grid.L) / (0.15 * grid.L))
    wu = sfft.fft2(W * u)
    Lu = sfft.ifft2((symbol(ext, "laplacian") + 4j * k * symbol(ext, "d_zbar")) * wu)
    res = Lu[sl, sl] - source
    mask = grid.interior_mask(interior)
    out = np.full((n, n), np.nan + 0j)
    out[mask] = res[mask]
    return out


def pde_residual(grid: GridSpec, k: complex, v: np.ndarray, mu: np.ndarray,
                 oversample: int | None = None, samples: np.ndarray | None = None) -> float:
    """Relative interior L2 residual of ``(Δ + 4ik d_zbar) mu = v mu``."""
    src = v * mu
    res = window_residual(grid, k, src, mu, oversample, samples=samples)
    mask = ~np.isnan(res)
    den = np.linalg.norm(src[mask])
    num = np.linalg.norm(res[mask])
    if den == 0.0:
        return float(num)
    return float(num / den)


def potential_hash(p: Potential) -> str:
    h = hashlib.sha256()
    h.update(np.float64(p.grid.L).tobytes())
    h.update(np.int64(p.grid.N).tobytes())
    h.update(np.ascontiguousarray(p.v.values.real).tobytes())
    return h.hexdigest()[:16]


def solve_mu(p: Potential, k: complex, method: str = "iterative", *, tol: float = 1e-10,
             maxiter: int = 500, restart: int = 100, oversample: int | None = None,
             residual: bool = True, residual_tol: float = 1e-6,
             boundary_tol: float = 1e-2, k_min: float = K_MIN, workers: int = 1,
             kappa_max: float = KAPPA_MAX, x0: np.ndarray | None = None) -> FaddeevField:
    """Solve ``mu = 1 + g_k * (v mu)`` for one ``k``.

    Parameters
    ----------
    p : Potential
    k : complex
    method : {"iterative", "dense"}
        GMRES with FFT convolutions, or a direct solve of the assembled
        matrix (``N <= 32``).
    tol : float
        Relative GMRES tolerance.
    residual : bool
        Compute the PDE residual diagnostic (one extra convolution on a
        doubled grid).

    Returns
    -------
    FaddeevField
    """
    grid = p.grid
    k = check_k(k, grid, k_min)
    v = p.v.values.real
    n = grid.N
    s = oversample or oversampling(grid.h, k, kappa_max)
    hist = []
    if not np.any(v):
        # the integral operator vanishes: mu = 1 exactly
        mu = np.ones((n, n), dtype=complex)
        diag = {"solver_iterations": 0, "oversample": s, "boundary_deviation": 0.0,
                "boundary_ok": True}
        if residual:
            diag.update(pde_residual=0.0, pde_ok=True)
        return FaddeevField(k, ComplexField(grid, mu), potential_hash(p), diag)
    # the residual check convolves on a grid twice as wide
    wide = kernel_samples(2 * n * s, grid.h / s, k) if residual else None
    G = GreenOperator(grid, k, s, workers=workers, samples=wide)
    if method == "dense":
        if n > 32:
            raise ValueError("dense solve limited to N <= 32")
        A = np.eye(n * n, dtype=complex) - G.matrix() * v.ravel()[None, :]
        mu = np.linalg.solve(A, np.ones(n * n, dtype=complex)).reshape(n, n)
        its = 1
    elif method == "iterative":
        def mv(x):
            x = x.reshape(n, n)
            return (x - G(v * x)).ravel()
        A = LinearOperator((n * n, n * n), matvec=mv, dtype=complex)
        b = np.ones(n * n, dtype=complex)
        cycles = max(1, math.ceil(maxiter / restart))
        sol, info = gmres(A, b, x0=None if x0 is None else x0.ravel(), rtol=tol, atol=0.0,
                          restart=restart, maxiter=cycles,
                          callback=hist.append, callback_type="pr_norm")
        its = len(hist)
        if info != 0:
            raise SolverError(f"GMRES did not converge for k = {k} after {its} iterations",
                              hist)
        mu = sol.reshape(n, n)
    else:
        raise ValueError(f"unknown method {method!r}")

    diag = {"solver_iterations": its, "oversample": G.s}
    ring = grid.outer_mask()
    diag["boundary_deviation"] = float(np.abs(mu[ring] - 1).max())
    diag["boundary_ok"] = diag["boundary_deviation"] <= boundary_tol
    if residual:
        diag["pde_residual"] = pde_residual(grid, k, v, mu, G.s, samples=wide)
        diag["pde_ok"] = diag["pde_residual"] <= residual_tol
    return FaddeevField(k, ComplexField(grid, mu), potential_hash(p), diag)


def psi_from_mu(f: FaddeevField, v: np.ndarray | None = None) -> ComplexField:
    """``psi = e^{ikz} mu``; with ``v`` the Schrödinger residual is attached.

    Since ``Δ(e^{ikz} mu) = e^{ikz} (Δ + 4ik d_zbar) mu`` the residual of
    ``(-Δ + v) psi`` is ``-e^{ikz}`` times the residual of the ``mu`` equation.
    """
    grid = f.mu.grid
    e = np.exp(1j * f.k * grid.z)
    psi = ComplexField(grid, e * f.mu.values)
    if v is not None:
        src = v * f.mu.values
        res = window_residual(grid, f.k, src, f.mu.values, f.diagnostics.get("oversample"))
        m = ~np.isnan(res)
        den = np.linalg.norm((e * src)[m])
        num = np.linalg.norm((e * res)[m])
        psi.meta["schrodinger_residual"] = float(num / den) if den else float(num)
    return psi


def mu_large_k_decay(p: Potential, ks, **kw) -> dict:
    """``sup |mu - 1|`` along a sequence of spectral parameters.

    Returns the table and the least-squares slope of ``log sup`` against
    ``log |k|``.
    """
    sups = []
    for k in ks:
        f = solve_mu(p, k, residual=False, **kw)
        sups.append(float(np.abs(f.mu.values - 1).max()))
    ks_abs = np.abs(np.asarray(ks, dtype=complex))
    s = np.asarray(sups)
    slope = None
    if np.all(s > 0) and len(s) > 1:
        slope = float(np.polyfit(np.log(ks_abs), np.log(s), 1)[0])
    return {"k": [complex(k) for k in ks], "sup": sups, "exponent": slope}
