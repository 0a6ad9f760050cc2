"""Traveling waves against the scattering-data dynamics.

Translation by ``y = ct`` multiplies ``b`` by ``e^{i(kc + k̄c̄)t}`` while the
time flow multiplies it by ``e^{i(k^3 + k̄^3)t}``.  A traveling wave needs both
at once, so ``b`` must vanish wherever the two rates differ.  The residual
below measures how far given data are from that.
"""
from __future__ import annotations

import numpy as np

from .conductivity import Potential
from .scattering import KGrid, ScatteringData, evolution_rate, forward_transform

ZERO_CURVE_TOL = 1e-3


def phase_gap(k, c):
    """``(k^3 + k̄^3) - (kc + k̄c̄)``, real; vectorised over ``k`` and ``c``."""
    k = np.asarray(k, dtype=complex)
    c = np.asarray(c, dtype=complex)
    return evolution_rate(k) - 2.0 * (k * c).real


def traveling_wave_residual(s: ScatteringData, c: complex) -> dict:
    """Residual density ``|phase_gap(k, c)| |b(k)|`` over the k-grid.

    Returns its sup, its quadrature L2 norm and the fraction of nodes close to
    the zero curve of the gap (where the density carries no information).
    """
    gap = phase_gap(s.kgrid.k, c)
    rho = np.abs(gap) * np.abs(s.b0)
    d = s.kgrid.d
    return {"sup_residual": float(rho.max()),
            "l2_residual": float(d * np.sqrt(np.sum(rho * rho))),
            "zero_curve_fraction": float(np.mean(np.abs(gap) < ZERO_CURVE_TOL))}


def velocity_grid(lo: float = -10.0, hi: float = 10.0, samples: int = 21) -> np.ndarray:
    x = np.linspace(lo, hi, samples)
    return (x[:, None] + 1j * x[None, :]).ravel()


def soliton_certificate(p: Potential | None, c_grid=None, *, kg: KGrid | None = None,
                        data: ScatteringData | None = None, **solver) -> dict:
    """Minimum of the L2 traveling-wave residual over a set of velocities.

    A genuine traveling wave would make the residual vanish for its velocity;
    a positive minimum over the box shows that the data are not those of a
    traveling wave.  Pass ``data`` to reuse an existing transform.
    """
    if data is None:
        data = forward_transform(p, kg or KGrid(2.0, 16), **solver)
    cs = velocity_grid() if c_grid is None else np.asarray(c_grid, dtype=complex).ravel()
    rows = [traveling_wave_residual(data, c) for c in cs]
    l2 = np.array([r["l2_residual"] for r in rows])
    i = int(np.argmin(l2))
    gaps = np.abs(phase_gap(data.kgrid.k.ravel()[None, :], cs[:, None]))
    return {"floor": float(l2[i]),
            "argmin_c": [float(cs[i].real), float(cs[i].imag)],
            "sup_b": data.sup(),
            "median_gap": float(np.median(gaps)),
            "positive": bool(l2[i] > 0),
            "samples": [{"c1": float(c.real), "c2": float(c.imag),
                         "sup_res": r["sup_residual"], "l2_res": r["l2_residual"]}
                        for c, r in zip(cs, rows)]}
