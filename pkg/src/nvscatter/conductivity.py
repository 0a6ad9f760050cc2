"""Conductivities, the potentials ``v = γ^{-1/2} Δ γ^{1/2}`` they generate,
decay certificates and the auxiliary field ``w`` with ``d_zbar w = -3 d_z v``."""
from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from .grid import (ComplexField, GridSpec, cauchy_dbar_residual, cauchy_transform,
                   spectral_derivative)

log = logging.getLogger(__name__)

DELTA0 = 1e-3


@dataclass
class Conductivity:
    """Positive conductivity normalised to 1 near the grid boundary."""

    gamma: ComplexField
    delta0: float = DELTA0
    far_tol: float = 1e-10

    def __post_init__(self):
        g = self.gamma.values.real
        if np.abs(self.gamma.values.imag).max(initial=0) > 1e-12:
            raise ValueError("conductivity must be real")
        if g.min() < self.delta0:
            raise ValueError(f"conductivity {g.min():.3g} below floor {self.delta0}")
        far = np.abs(g[self.gamma.grid.outer_mask()] - 1).max()
        if far > self.far_tol:
            raise ValueError(f"conductivity deviates from 1 by {far:.2e} near the boundary")

    @property
    def grid(self) -> GridSpec:
        return self.gamma.grid


@dataclass
class Potential:
    """Real Schrödinger potential with an optional decay certificate ``(q, eps)``."""

    v: ComplexField
    certificate: dict | None = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if np.abs(self.v.values.imag).max(initial=0) > 1e-12:
            raise ValueError("potential must be real")
        self.v.real = True
        self.v.values = self.v.values.real.astype(complex)

    @property
    def grid(self) -> GridSpec:
        return self.v.grid

    @classmethod
    def zero(cls, grid: GridSpec) -> "Potential":
        return cls(ComplexField(grid, np.zeros((grid.N, grid.N)), real=True))


def bump_gamma(grid: GridSpec, A: float = 1.0, sigma: float = 1.0, z0: complex = 0j,
               delta0: float = DELTA0) -> Conductivity:
    """``γ(z) = 1 + A exp(-|z - z0|^2 / σ^2)``."""
    if sigma <= 0:
        raise ValueError("width must be positive")
    if 1 + min(A, 0.0) < delta0:
        raise ValueError(f"1 + A = {1 + A:.3g} violates the floor {delta0}")
    if sigma > grid.L / 4:
        raise ValueError(f"width {sigma} exceeds L/4 = {grid.L / 4}")
    r2 = np.abs(grid.z - z0) ** 2
    g = 1.0 + A * np.exp(-r2 / sigma**2)
    return Conductivity(ComplexField(grid, g, real=True), delta0)


def potential_from_gamma(c: Conductivity, identity_tol: float = 1e-8) -> Potential:
    """``v = Δ(γ^{1/2}) / γ^{1/2}`` with spectral derivatives.

    The defining identity ``(-Δ + v) γ^{1/2} = 0`` is checked and its relative
    size stored in ``meta["identity_residual"]``.
    """
    grid = c.grid
    root = np.sqrt(c.gamma.values.real)
    lap = spectral_derivative(root - 1.0, "laplacian", grid).real
    v = lap / root
    ident = np.linalg.norm(-lap + v * root) / np.linalg.norm(root)
    if ident > identity_tol:
        raise ArithmeticError(f"identity residual {ident:.2e} exceeds {identity_tol}")
    p = Potential(ComplexField(grid, v, real=True))
    p.meta["identity_residual"] = float(ident)
    return p


def verify_decay(p: Potential, q: float, eps: float) -> bool:
    """Nodewise check of ``|v(z)| <= q (1 + |z|)^{-2-eps}``; certifies on success.

    The integrability hypothesis on the gradient of ``γ^{1/2}`` cannot be
    verified on a grid; the certificate records it as assumed.
    """
    bound = q * (1 + np.abs(p.grid.z)) ** (-2 - eps)
    ok = bool(np.all(np.abs(p.v.values) <= bound))
    if ok:
        p.certificate = {"q": float(q), "eps": float(eps),
                         "gradient_integrability": "assumed from construction"}
    return ok


def compute_w(p: Potential, tol: float = 1e-6, far_ratio: float = 1e-2) -> ComplexField:
    """Decaying solution of ``d_zbar w = -3 d_z v``.

    Raises if ``v`` leaks at the boundary or if ``w`` fails the residual or
    far-field checks.
    """
    grid = p.grid
    dv = spectral_derivative(p.v.values, "d_z", grid)
    w = cauchy_transform(-3.0 * dv, grid)
    scale = np.abs(dv).max(initial=0.0)
    out = ComplexField(grid, w)
    if scale == 0.0:
        out.meta.update(residual=0.0, far_ratio=0.0)
        return out
    res = cauchy_dbar_residual(-3.0 * dv, grid)
    inner = grid.interior_mask()
    r = float(np.abs(res[inner]).max() / scale)
    fr = float(np.abs(w[grid.outer_mask()]).max() / np.abs(w).max())
    out.meta.update(residual=r, far_ratio=fr)
    if r > tol:
        raise ArithmeticError(f"w residual {r:.2e} exceeds {tol}")
    if fr > far_ratio:
        raise ArithmeticError(f"w does not decay: boundary ratio {fr:.2e}")
    return out
