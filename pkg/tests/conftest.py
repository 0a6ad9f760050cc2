import numpy as np
import pytest

from nvscatter.conductivity import bump_gamma, potential_from_gamma
from nvscatter.faddeev import solve_mu
from nvscatter.grid import make_grid
from nvscatter.scattering import KGrid, ScatteringData, compute_b

# reference settings of the acceptance suite
L_REF, N_REF, K_REF, M_REF = 8.0, 64, 2.0, 16
SAMPLE_Z = (0.0, 1.0 + 0.5j, -1.5 + 1.0j)

_acceptance_lines = []


def record(criterion, ok, detail):
    """Collect one PASS/FAIL line for the acceptance summary."""
    line = f"criterion {criterion}: {'PASS' if ok else 'FAIL'}  {detail}"
    _acceptance_lines.append(line)
    print(line)


def pytest_terminal_summary(terminalreporter):
    if _acceptance_lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(_acceptance_lines, key=lambda s: s.split(":")[0]):
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def small_grid():
    return make_grid(L_REF, 32)


@pytest.fixture(scope="session")
def small_bump(small_grid):
    c = bump_gamma(small_grid)
    return c, potential_from_gamma(c)


@pytest.fixture(scope="session")
def ref_grid():
    return make_grid(L_REF, N_REF)


@pytest.fixture(scope="session")
def ref_bump(ref_grid):
    c = bump_gamma(ref_grid)
    return c, potential_from_gamma(c)


@pytest.fixture(scope="session")
def ref_kgrid():
    return KGrid(K_REF, M_REF)


@pytest.fixture(scope="session")
def reference_sweep(ref_bump, ref_kgrid, ref_grid):
    """Forward transform of the reference bump at every k node, keeping the
    solver diagnostics and mu at a few sample points."""
    _, p = ref_bump
    idx = [int(np.argmin(np.abs(ref_grid.z.ravel() - z))) for z in SAMPLE_Z]
    nodes = ref_kgrid.nodes()
    b = np.empty(nodes.size, dtype=complex)
    diags, mu_samples = [], {}
    for i, k in enumerate(nodes):
        f = solve_mu(p, k)
        b[i] = compute_b(p, f)
        diags.append(f.diagnostics)
        mu_samples[complex(k)] = f.mu.values.ravel()[idx]
    data = ScatteringData(ref_kgrid, b.reshape(ref_kgrid.M, ref_kgrid.M))
    return {"data": data, "diagnostics": diags, "mu_samples": mu_samples,
            "z_index": idx, "z": ref_grid.z.ravel()[idx]}
