"""Uniform square grids, plane quadrature, spectral derivatives and the solid
Cauchy transform.

Fields are stored as ``(N, N)`` complex arrays indexed ``[m, n]`` with node
``z_mn = (-L + m h) + i (-L + n h)``; flattening in C order gives the row-major
layout used by the binary field format.
"""
from __future__ import annotations

import logging
import warnings
from dataclasses import dataclass, field

import numpy as np
import scipy.fft as sfft
from scipy.special import erfc, j0

log = logging.getLogger(__name__)

#: relative size of the boundary ring above which derivatives warn about leakage
LEAKAGE_THRESHOLD = 1e-6


class BoundaryLeakageWarning(UserWarning):
    """A field handed to a periodic operator does not vanish at the boundary."""


@dataclass(frozen=True)
class GridSpec:
    """Uniform grid on ``[-L, L)^2`` with ``N`` nodes per axis.

    Parameters
    ----------
    L : float
        Half width of the square.
    N : int
        Nodes per axis, even.
    """

    L: float
    N: int

    def __post_init__(self):
        if not np.isfinite(self.L) or self.L <= 0:
            raise ValueError(f"half width must be positive, got {self.L}")
        if int(self.N) != self.N or self.N % 2 or self.N < 2:
            raise ValueError(f"N must be a positive even integer, got {self.N}")
        object.__setattr__(self, "L", float(self.L))
        object.__setattr__(self, "N", int(self.N))

    @property
    def h(self) -> float:
        return 2.0 * self.L / self.N

    @property
    def x(self) -> np.ndarray:
        """1-D node coordinates."""
        return -self.L + self.h * np.arange(self.N)

    @property
    def z(self) -> np.ndarray:
        """Complex node coordinates, shape ``(N, N)``."""
        x = self.x
        return x[:, None] + 1j * x[None, :]

    @property
    def weight(self) -> float:
        """Quadrature weight shared by every node."""
        return self.h * self.h

    @property
    def xi(self) -> np.ndarray:
        """Angular FFT frequencies along one axis."""
        return 2.0 * np.pi * sfft.fftfreq(self.N, d=self.h)

    @property
    def xi_max(self) -> float:
        return np.pi / self.h

    def refine(self, factor: int = 2) -> "GridSpec":
        return GridSpec(self.L, self.N * factor)

    def outer_mask(self, fraction: float = 0.1) -> np.ndarray:
        """Nodes in the outermost ``fraction`` of the square (sup-norm annulus)."""
        z = self.z
        r = np.maximum(np.abs(z.real), np.abs(z.imag))
        return r >= (1.0 - fraction) * self.L

    def interior_mask(self, fraction: float = 0.5) -> np.ndarray:
        """Nodes with ``|x1|, |x2| <= fraction * L``."""
        z = self.z
        return (np.abs(z.real) <= fraction * self.L) & (np.abs(z.imag) <= fraction * self.L)


def make_grid(L: float, N: int, *, allow_small: bool = False) -> GridSpec:
    """Build a grid, enforcing ``N >= 8`` unless ``allow_small`` is set."""
    if int(N) != N or N % 2:
        raise ValueError(f"N must be even, got {N}")
    if N < 8 and not allow_small:
        raise ValueError(f"N must be at least 8, got {N}")
    if L <= 0:
        raise ValueError(f"L must be positive, got {L}")
    return GridSpec(L, N)


@dataclass
class ComplexField:
    """Samples of a complex function on a :class:`GridSpec`.

    ``real`` marks fields that are real up to rounding; the flag is checked on
    construction.
    """

    grid: GridSpec
    values: np.ndarray
    real: bool = False
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        v = np.asarray(self.values, dtype=complex)
        n = self.grid.N
        if v.size != n * n:
            raise ValueError(f"expected {n * n} values, got {v.size}")
        v = v.reshape(n, n)
        if self.real:
            imag = np.abs(v.imag).max(initial=0.0)
            if imag > 1e-12:
                raise ValueError(f"field flagged real has imaginary part {imag:.3e}")
            v = v.real.astype(complex)
        self.values = v

    def __array__(self, dtype=None, copy=None):
        return self.values if dtype is None else self.values.astype(dtype)

    def sup(self) -> float:
        return float(np.abs(self.values).max(initial=0.0))


def as_array(f) -> np.ndarray:
    return f.values if isinstance(f, ComplexField) else np.asarray(f)


def integrate(f, grid: GridSpec | None = None) -> complex:
    """Trapezoid rule on the periodic square: ``h^2 * sum(f)``."""
    if isinstance(f, ComplexField):
        grid = f.grid
    if grid is None:
        raise TypeError("grid required for bare arrays")
    return complex(grid.weight * np.sum(as_array(f)))


def boundary_ratio(values: np.ndarray, width: int = 2) -> float:
    """Max of ``|f|`` on the outer ``width`` node rings over the max elsewhere."""
    a = np.abs(values)
    inner = a[width:-width, width:-width].max(initial=0.0)
    ring = max(a[:width].max(), a[-width:].max(), a[:, :width].max(), a[:, -width:].max())
    if inner == 0.0:
        return 0.0 if ring == 0.0 else np.inf
    return float(ring / inner)


def symbol(grid: GridSpec, which: str) -> np.ndarray:
    """Fourier multiplier of ``d_z``, ``d_zbar`` or ``laplacian`` on the FFT lattice."""
    xi = grid.xi
    x1, x2 = xi[:, None], xi[None, :]
    if which == "d_z":
        return 0.5j * (x1 - 1j * x2)
    if which == "d_zbar":
        return 0.5j * (x1 + 1j * x2)
    if which == "laplacian":
        return -(x1 * x1 + x2 * x2) + 0j
    raise ValueError(f"unknown derivative {which!r}")


def spectral_derivative(f, which: str, grid: GridSpec | None = None, *, check: bool = True):
    """Differentiate a decaying field with FFT multipliers.

    Returns a :class:`ComplexField` when given one, else an array.
    """
    if isinstance(f, ComplexField):
        grid = f.grid
    a = as_array(f)
    if check and boundary_ratio(a) > LEAKAGE_THRESHOLD:
        warnings.warn(f"field does not vanish at the grid boundary "
                      f"(ratio {boundary_ratio(a):.2e})", BoundaryLeakageWarning, stacklevel=2)
    out = sfft.ifft2(symbol(grid, which) * sfft.fft2(a))
    if isinstance(f, ComplexField):
        return ComplexField(grid, out)
    return out


def cauchy_kernel_hat(n: int, h: float, radius: float) -> np.ndarray:
    """DFT of the truncated Cauchy kernel ``1_{|z|<R} / (pi z)``.

    On an ``n x n`` periodic lattice of spacing ``h`` the exact Fourier
    transform ``-2i (1 - J0(R|xi|)) / xi_c`` is sampled; the value at the zero
    frequency is its limit 0.
    """
    xi = 2.0 * np.pi * sfft.fftfreq(n, d=h)
    x1, x2 = xi[:, None], xi[None, :]
    xc = x1 + 1j * x2
    r = np.abs(xc)
    with np.errstate(divide="ignore", invalid="ignore"):
        khat = -2j * (1.0 - j0(radius * r)) / xc
    khat[0, 0] = 0.0
    return khat


def cauchy_convolve(values: np.ndarray, h: float, pad: int = 3) -> np.ndarray:
    """Apply ``(1/pi) ∬ f(w) / (z - w)`` to samples on a square lattice.

    Works for any lattice offset and for stacks of fields (leading axes). The
    kernel is cut off at the diameter of the data box and periodised on a box
    ``pad`` times larger, so the periodic convolution equals the free-space
    one at every node while keeping spectral accuracy.
    """
    a = np.asarray(values, dtype=complex)
    n = a.shape[-1]
    radius = np.sqrt(2.0) * n * h
    npad = pad * n
    khat = cauchy_kernel_hat(npad, h, radius)
    shape = a.shape[:-2] + (npad, npad)
    buf = np.zeros(shape, dtype=complex)
    buf[..., :n, :n] = a
    out = sfft.ifft2(khat * sfft.fft2(buf, axes=(-2, -1)), axes=(-2, -1))
    return out[..., :n, :n]


def cauchy_transform(f, grid: GridSpec | None = None):
    """Solid Cauchy transform, the decaying solution of ``d_zbar g = f``."""
    if isinstance(f, ComplexField):
        return ComplexField(f.grid, cauchy_convolve(f.values, f.grid.h))
    if grid is None:
        raise TypeError("grid required for bare arrays")
    return cauchy_convolve(f, grid.h)


def fourier_shift(values: np.ndarray, grid: GridSpec, y: complex) -> np.ndarray:
    """Band-limited translation ``f(z - y)`` of a field that vanishes at the boundary."""
    xi = grid.xi
    ph = np.exp(-1j * (xi[:, None] * y.real + xi[None, :] * y.imag))
    return sfft.ifft2(ph * sfft.fft2(values))


def fourier_upsample(values: np.ndarray, factor: int) -> np.ndarray:
    """Trigonometric interpolation onto a grid ``factor`` times finer.

    The coarse nodes are a subset of the fine ones (every ``factor``-th node).
    The Nyquist coefficient is split evenly between the two signed frequencies
    so that real data stays real.
    """
    if factor == 1:
        return np.asarray(values, dtype=complex)
    a = np.asarray(values, dtype=complex)
    n = a.shape[-1]
    nf = factor * n
    c = sfft.fft2(a, axes=(-2, -1))
    half = n // 2
    big = np.zeros(a.shape[:-2] + (nf, nf), dtype=complex)
    idx = np.r_[0:half, nf - half:nf]
    src = np.r_[0:half, n - half:n]
    big[..., idx[:, None], idx[None, :]] = c[..., src[:, None], src[None, :]]
    # split the Nyquist rows/columns symmetrically
    big[..., half, :] = big[..., nf - half, :] * 0.5
    big[..., nf - half, :] *= 0.5
    big[..., :, half] = big[..., :, nf - half] * 0.5
    big[..., :, nf - half] *= 0.5
    return sfft.ifft2(big, axes=(-2, -1)) * factor * factor


def extended_grid(grid: GridSpec) -> GridSpec:
    """Grid of the same spacing covering ``[-2L, 2L)^2``."""
    return GridSpec(2 * grid.L, 2 * grid.N)


def embed(values: np.ndarray, grid: GridSpec) -> np.ndarray:
    """Place a field in the centre of its extended grid, zero elsewhere."""
    n = grid.N
    out = np.zeros(np.shape(values)[:-2] + (2 * n, 2 * n), dtype=complex)
    out[..., n // 2:n // 2 + n, n // 2:n // 2 + n] = values
    return out


def restrict(values: np.ndarray, grid: GridSpec) -> np.ndarray:
    """Inverse of :func:`embed`."""
    n = grid.N
    return values[..., n // 2:n // 2 + n, n // 2:n // 2 + n]


def far_window(grid: GridSpec) -> np.ndarray:
    """Smooth cutoff on the extended grid: 1 well inside, 0 near its edge."""
    ext = extended_grid(grid)
    return 0.5 * erfc((np.abs(ext.z) - 1.375 * grid.L) / (0.15 * grid.L))


def windowed_apply(values_ext: np.ndarray, grid: GridSpec, mult: np.ndarray) -> np.ndarray:
    """Apply a Fourier multiplier of the extended grid to a slowly decaying
    field after the smooth far cutoff; returns values on ``grid``."""
    wu = sfft.fft2(far_window(grid) * values_ext)
    return restrict(sfft.ifft2(mult * wu), grid)


def cauchy_dbar_residual(f: np.ndarray, grid: GridSpec) -> np.ndarray:
    """``d_zbar C[f] - f`` on ``grid`` for the discrete Cauchy transform.

    The transform is re-evaluated on the extended grid so that its slow
    ``1/z`` tail can be cut off smoothly before spectral differentiation.
    """
    ext = extended_grid(grid)
    g = cauchy_convolve(embed(f, grid), grid.h)
    return windowed_apply(g, grid, symbol(ext, "d_zbar")) - f
