"""Scattering data ``b(k) = ∬ e^{i(ky + k̄ȳ)} v(y) mu(y, k) dy`` on a k-grid
and its exact phase laws under translation and time evolution."""
from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from .conductivity import Potential
from .faddeev import K_MIN, FaddeevField, SolverError, potential_hash, solve_mu
from .grid import ComplexField, boundary_ratio, fourier_shift

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class KGrid:
    """Square k-lattice of half width ``K`` with ``M`` nodes per axis, shifted
    by half a spacing so that ``k = 0`` is never a node.

    Nodes are ``k_ij = (-K + (i + 1/2) d) + i (-K + (j + 1/2) d)`` with
    ``d = 2K / M``, stored as ``(M, M)`` arrays indexed ``[i, j]``.
    """

    K: float
    M: int
    k_min: float = K_MIN

    def __post_init__(self):
        if self.K <= 0:
            raise ValueError("K must be positive")
        if self.M % 2 or self.M < 2:
            raise ValueError(f"M must be even and >= 2, got {self.M}")
        if np.abs(self.k).min() < self.k_min:
            raise ValueError(f"innermost node |k| = {np.abs(self.k).min():.3g} "
                             f"below k_min = {self.k_min}")

    @property
    def d(self) -> float:
        return 2.0 * self.K / self.M

    @property
    def axis(self) -> np.ndarray:
        return -self.K + self.d * (np.arange(self.M) + 0.5)

    @property
    def k(self) -> np.ndarray:
        a = self.axis
        return a[:, None] + 1j * a[None, :]

    def nodes(self) -> np.ndarray:
        """Flat node list in storage order."""
        return self.k.ravel()

    def interior_mask(self, width: int = 1) -> np.ndarray:
        m = np.zeros((self.M, self.M), bool)
        m[width:-width, width:-width] = True
        return m


@dataclass
class ScatteringData:
    """Values of ``b`` on a :class:`KGrid`.

    ``b0`` holds the data at time 0; :attr:`b` applies the evolution phase for
    the stored time ``t``, so repeated evolutions compose exactly.
    """

    kgrid: KGrid
    b0: np.ndarray
    t: float = 0.0
    provenance: dict = field(default_factory=dict)

    def __post_init__(self):
        self.b0 = np.asarray(self.b0, dtype=complex).reshape(self.kgrid.M, self.kgrid.M)
        if not np.all(np.isfinite(self.b0)):
            raise ValueError("scattering data must be finite")

    @property
    def b(self) -> np.ndarray:
        if self.t == 0.0:
            return self.b0
        return self.b0 * np.exp(1j * evolution_rate(self.kgrid.k) * self.t)

    @classmethod
    def at_time(cls, kgrid: KGrid, b: np.ndarray, t: float, provenance=None):
        """Build from values observed at time ``t``."""
        b0 = np.asarray(b, dtype=complex).reshape(kgrid.M, kgrid.M)
        if t != 0.0:
            b0 = b0 * np.exp(-1j * evolution_rate(kgrid.k) * t)
        return cls(kgrid, b0, float(t), dict(provenance or {}))

    def sup(self) -> float:
        return float(np.abs(self.b0).max(initial=0.0))


def evolution_rate(k) -> np.ndarray:
    """``k^3 + conj(k)^3 = 2 Re k^3``."""
    k = np.asarray(k, dtype=complex)
    return 2.0 * (k**3).real


def plane_phase(k, y) -> np.ndarray:
    """``e^{i(ky + k̄ȳ)} = e^{2i Re(k y)}``."""
    return np.exp(2j * (np.asarray(k) * np.asarray(y)).real)


def compute_b(p: Potential, f: FaddeevField) -> complex:
    """Trapezoid value of ``∬ e^{i(ky + k̄ȳ)} v mu``."""
    if f.potential_hash != potential_hash(p):
        raise ValueError("mu was solved for a different potential")
    grid = p.grid
    integrand = plane_phase(f.k, grid.z) * p.v.values.real * f.mu.values
    return complex(grid.weight * integrand.sum())


def forward_transform(p: Potential, kg: KGrid, *, threads: int = 1,
                      diagnostics: bool = False, **solver) -> ScatteringData:
    """Solve for ``mu`` and evaluate ``b`` at every node of ``kg``.

    ``solver`` keywords are passed to :func:`solve_mu`.  With ``diagnostics``
    the per-node solver diagnostics are collected in the provenance.
    """
    nodes = kg.nodes()
    solver.setdefault("k_min", kg.k_min)

    def one(k):
        try:
            f = solve_mu(p, k, residual=diagnostics, **solver)
        except SolverError as e:
            return e
        return compute_b(p, f), f.diagnostics

    if threads == 1:
        results = [one(k) for k in nodes]
    else:
        with ThreadPoolExecutor(max_workers=threads or None) as ex:
            results = list(ex.map(one, nodes))
    failed = [i for i, r in enumerate(results) if isinstance(r, Exception)]
    if failed:
        raise SolverError(f"{len(failed)} node(s) failed: indices {failed[:10]}",
                          [results[i].history for i in failed])
    b = np.array([r[0] for r in results])
    prov = {"potential": potential_hash(p), "L": p.grid.L, "N": p.grid.N,
            "K": kg.K, "M": kg.M,
            "solver": {k: v for k, v in solver.items() if isinstance(v, (int, float, str))}}
    if diagnostics:
        prov["diagnostics"] = [r[1] for r in results]
    return ScatteringData(kg, b, 0.0, prov)


def continuity_proxy(s: ScatteringData, factor: float = 5.0) -> dict:
    """Nearest-neighbour jumps of ``b`` along both lattice axes.

    A smooth function has jumps of comparable size everywhere, so a single
    jump much larger than the median flags a discontinuity.  This is a
    heuristic with no modulus of continuity behind it and is reported as such.
    """
    b = s.b
    jumps = np.concatenate([np.abs(np.diff(b, axis=0)).ravel(),
                            np.abs(np.diff(b, axis=1)).ravel()])
    med = float(np.median(jumps))
    top = float(jumps.max())
    return {"max_jump": top, "median_jump": med, "ratio": top / med if med else 0.0,
            "factor": factor, "ok": bool(top <= factor * med) if med else top == 0.0,
            "heuristic": True}


def shift_b(s: ScatteringData, y: complex) -> ScatteringData:
    """Scattering data of the translated potential ``v(z - y)``."""
    ph = plane_phase(s.kgrid.k, y)
    prov = dict(s.provenance)
    total = complex(*prov.get("shift", (0.0, 0.0))) + complex(y)
    prov["shift"] = [total.real, total.imag]
    return ScatteringData(s.kgrid, s.b0 * ph, s.t, prov)


def evolve_b(s: ScatteringData, t: float) -> ScatteringData:
    """Advance the data by time ``t``: ``b(k, t) = e^{i(k^3 + k̄^3) t} b(k, 0)``."""
    return replace(s, t=s.t + float(t), provenance=dict(s.provenance))


def translate_potential(p: Potential, y: complex, leak_tol: float = 1e-4) -> Potential:
    """Band-limited translate ``v(z - y)`` on the same grid."""
    vy = fourier_shift(p.v.values.real, p.grid, complex(y)).real
    if boundary_ratio(vy) > leak_tol:
        raise ValueError(f"translated potential reaches the grid boundary (ratio "
                         f"{boundary_ratio(vy):.2e})")
    return Potential(ComplexField(p.grid, vy, real=True))


def verify_shift_lemma(p: Potential, y: complex, kg: KGrid, *, base: ScatteringData | None = None,
                       threads: int = 1, leak_tol: float = 1e-4, **solver) -> dict:
    """Compare the transform of ``v(. - y)`` with the phase law applied to ``b``.

    Returns the max and median nodewise relative errors.
    """
    s = base if base is not None else forward_transform(p, kg, threads=threads, **solver)
    sy = forward_transform(translate_potential(p, y, leak_tol), kg, threads=threads, **solver)
    pred = shift_b(s, y).b0
    err = np.abs(sy.b0 - pred) / np.maximum(np.abs(pred), 1e-300)
    if s.sup() == 0.0:
        err = np.abs(sy.b0 - pred)
    return {"max_rel_error": float(err.max()), "median_rel_error": float(np.median(err)),
            "y": [float(np.real(y)), float(np.imag(y))]}
