from math import comb

import mpmath as mp
import numpy as np
import pytest
from scipy.special import exp1

from nvscatter.logquad import LATTICE_LOG_MOMENTS, correction_stencil, moment, orbit


def epstein_derivative(s):
    """d/ds of sum_{n != 0} |n|^(-2s) = 4 zeta(s) beta(s) on the square lattice."""
    beta = lambda x: mp.dirichlet(x, [0, 1, 0, -1])
    return mp.diff(lambda x: 4 * mp.zeta(x) * beta(x), s)


@pytest.mark.parametrize("m", [0, 1, 2, 3, 4])
def test_radial_moments_match_epstein_zeta(m):
    mp.mp.dps = 30
    lhs = sum(comb(m, a // 2) * moment(a, 2 * m - a) for a in range(0, 2 * m + 1, 2))
    rhs = float(epstein_derivative(-m)) / 2
    # the moments come from a least-squares fit; higher degrees are less exact
    assert lhs == pytest.approx(rhs, rel=1e-11 if m < 3 else 1e-8)


def test_moment_symmetry_and_odd_vanish():
    assert moment(2, 4) == moment(4, 2)
    assert moment(1, 2) == 0.0 and moment(3, 3) == 0.0


def test_orbits():
    assert orbit(0, 0) == [(0, 0)]
    assert len(orbit(1, 0)) == 4 and len(orbit(1, 1)) == 4 and len(orbit(2, 1)) == 8


def test_stencil_reproduces_moments():
    off, w = correction_stencil()
    assert off.shape == (45, 2)
    for (a, b), M in LATTICE_LOG_MOMENTS.items():
        got = np.sum(w * off[:, 0].astype(float) ** a * off[:, 1].astype(float) ** b)
        assert got == pytest.approx(M, abs=1e-13)
    # odd moments vanish by symmetry
    assert abs(np.sum(w * off[:, 0] ** 3 * off[:, 1])) < 1e-13


def corrected_log_integral(phi, h, n=40):
    """h^2 [sum' log|hn| phi(hn) + log h phi(0) + sum_S w phi(hn)]."""
    i = np.arange(-n, n + 1)
    y = h * (i[:, None] + 1j * i[None, :])
    vals = phi(y)
    r = np.abs(y)
    with np.errstate(divide="ignore"):
        logs = np.where(r > 0, np.log(r), 0.0)
    total = np.sum(logs * vals) + np.log(h) * phi(0j)
    off, w = correction_stencil()
    total += np.sum(w * phi(h * (off[:, 0] + 1j * off[:, 1])))
    return h * h * total


def test_corrected_rule_converges_at_tenth_order():
    # int log|y| exp(-|y|^2) dy = -pi * euler_gamma / 2
    exact = -np.pi * np.euler_gamma / 2
    errs = [abs(corrected_log_integral(lambda y: np.exp(-np.abs(y) ** 2), h, n=int(7 / h)).real
                - exact) for h in (0.5, 0.25, 0.125)]
    assert errs[2] < 1e-10
    assert errs[0] / errs[1] > 2**10 and errs[1] / errs[2] > 2**10


def test_corrected_rule_shifted_gaussian():
    # int log|y| exp(-|y - c|^2) dy = pi (log|c| + E1(|c|^2) / 2)
    c = 0.7 + 0.2j
    exact = np.pi * (np.log(abs(c)) + exp1(abs(c) ** 2) / 2)
    got = corrected_log_integral(lambda y: np.exp(-np.abs(y - c) ** 2), 0.125, n=56)
    assert got.real == pytest.approx(exact, abs=1e-10)
