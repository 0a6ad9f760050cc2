import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from nvscatter.conductivity import Potential, bump_gamma, potential_from_gamma
from nvscatter.faddeev import (GreenOperator, ResonanceError, SolverError, check_k,
                               faddeev_greens, faddeev_multiplier, g1, half_shifted_multiplier,
                               mu_large_k_decay, oversampling, potential_hash, psi_from_mu,
                               solve_mu, window_residual)
from nvscatter.grid import make_grid

grid = make_grid(8.0, 64)
p = potential_from_gamma(bump_gamma(grid))


def test_multiplier_value():
    assert faddeev_multiplier(1.0, 0.0, 1.0) == pytest.approx(-1 / 3)


def test_multiplier_resonance_guard():
    with pytest.raises(ResonanceError):
        faddeev_multiplier(0.0, 0.0, 1.0)
    # second zero at xi_c = -2 conj(k)
    with pytest.raises(ResonanceError):
        faddeev_multiplier(-2.0, 2.0, 1.0 + 1.0j)
    assert np.all(np.isfinite(half_shifted_multiplier(grid, 0.7 + 0.2j)))


@settings(max_examples=50, deadline=None)
@given(st.floats(-5, 5), st.floats(-5, 5), st.floats(-2, 2), st.floats(-2, 2))
def test_multiplier_conjugation(x1, x2, k1, k2):
    k = complex(k1, k2)
    xc = complex(x1, x2)
    if abs(xc) < 1e-3 or abs(np.conj(xc) + 2 * k) < 1e-3:
        return
    # the |xi|^2 part is real, so conjugation maps (xi, k) to (conj xi, conj k)
    a = faddeev_multiplier(x1, x2, k)
    b = faddeev_multiplier(x1, -x2, np.conj(k))
    assert np.conj(a) == pytest.approx(b, rel=1e-12)


@pytest.mark.parametrize("z", [0.3 + 0.1j, -2.0 + 1.5j, 4.0 - 3.0j, 10j])
def test_g1_matches_exponential_integral(z):
    mp.mp.dps = 30
    ref = -mp.exp(-1j * z) * mp.re(mp.e1(-1j * z)) / (2 * mp.pi)
    assert complex(g1(z)) == pytest.approx(complex(ref), rel=1e-12)


def test_g1_logarithmic_singularity():
    # g_1(z) - e^{-iz} log|z| / 2π -> (γ) / 2π at the origin
    z = 1e-6 * (1 + 1j)
    reg = g1(z) - np.exp(-1j * z) * np.log(abs(z)) / (2 * np.pi)
    assert reg == pytest.approx(np.euler_gamma / (2 * np.pi), abs=1e-5)


def test_greens_scaling():
    k = 0.5 - 1.25j
    G = faddeev_greens(grid, k).values
    z = grid.z
    off = z != 0
    assert np.allclose(G[off], g1(k * z[off]), rtol=1e-14)
    assert G[~off][0] == pytest.approx((np.euler_gamma + np.log(abs(k))) / (2 * np.pi))


@pytest.mark.parametrize("k", [0.15 + 0.1j, 1.0 - 0.5j, -2.5 + 2.0j])
def test_green_operator_inverts_pde(k):
    f = np.exp(-np.abs(grid.z - 0.5) ** 2) * (1 + 0.3 * grid.z.real)
    res = window_residual(grid, k, f, None)
    m = ~np.isnan(res)
    assert np.linalg.norm(res[m]) / np.linalg.norm(f[m]) <= 1e-6


def test_green_operator_matrix_matches_apply():
    g = make_grid(8.0, 8, allow_small=True)
    G = GreenOperator(g, 0.7 + 0.4j)
    x = np.random.default_rng(1).normal(size=(8, 8)) + 0j
    assert np.allclose(G.matrix() @ x.ravel(), G(x).ravel(), atol=1e-14)


def test_check_k():
    with pytest.raises(ValueError):
        check_k(0.0)
    with pytest.raises(ValueError):
        check_k(0.05)
    with pytest.raises(ValueError):
        check_k(complex(np.nan, 0))
    with pytest.raises(ValueError):
        check_k(6.0, grid)
    assert check_k(0.05, k_min=0.01) == 0.05


def test_oversampling_rule():
    assert oversampling(0.25, 1.0) == 2
    assert oversampling(0.25, 2.0) == 2
    assert oversampling(0.25, 4.0) == 3
    assert oversampling(0.5, 1.6, minimum=1) == 2


@pytest.mark.parametrize("k", [0.3 + 0.2j, 3.0 - 1.0j])
def test_zero_potential_gives_one(k):
    f = solve_mu(Potential.zero(grid), k)
    assert np.all(f.mu.values == 1.0)
    psi = psi_from_mu(f).values
    assert np.array_equal(psi, np.exp(1j * k * grid.z))


def test_psi_modulus_identity():
    k = 0.75 + 0.5j
    f = solve_mu(p, k, residual=False)
    psi = psi_from_mu(f).values
    z = grid.z
    expected = np.abs(f.mu.values) * np.exp(-(k.imag * z.real + k.real * z.imag))
    assert np.allclose(np.abs(psi), expected, rtol=1e-13)


def test_bump_solution_residuals():
    k = 0.875 - 0.625j
    f = solve_mu(p, k)
    assert f.diagnostics["pde_residual"] <= 1e-6 and f.diagnostics["pde_ok"]
    assert f.diagnostics["solver_iterations"] > 0
    psi = psi_from_mu(f, p.v.values.real)
    assert psi.meta["schrodinger_residual"] <= 1e-6
    assert f.potential_hash == potential_hash(p)


def test_dense_matches_iterative():
    g = make_grid(8.0, 32)
    q = potential_from_gamma(bump_gamma(g))
    k = 0.6 + 0.9j
    a = solve_mu(q, k, method="dense", residual=False).mu.values
    b = solve_mu(q, k, residual=False).mu.values
    assert np.abs(a - b).max() <= 1e-8
    with pytest.raises(ValueError):
        solve_mu(p, k, method="dense")
    with pytest.raises(ValueError):
        solve_mu(q, k, method="lu")


def test_nonconvergence_reports_history():
    with pytest.raises(SolverError) as e:
        solve_mu(p, 0.5 + 0.5j, tol=1e-15, maxiter=2, restart=1, residual=False)
    assert len(e.value.history) >= 1


def test_boundary_deviation_shrinks_with_box():
    k = 0.375 + 0.125j
    small = solve_mu(p, k, residual=False).diagnostics["boundary_deviation"]
    big_grid = make_grid(16.0, 128)
    big = solve_mu(potential_from_gamma(bump_gamma(big_grid)), k, residual=False)
    assert big.diagnostics["boundary_deviation"] <= small


def test_large_k_decay():
    assert mu_large_k_decay(Potential.zero(grid), [1, 2, 4])["sup"] == [0.0, 0.0, 0.0]
    r = mu_large_k_decay(p, [1.0, 2.0, 4.0])
    assert all(b < a for a, b in zip(r["sup"], r["sup"][1:]))
    assert r["exponent"] < 0


def test_potential_hash_distinguishes():
    q = potential_from_gamma(bump_gamma(grid, A=0.5))
    assert potential_hash(p) != potential_hash(q)
    assert len(potential_hash(p)) == 16
