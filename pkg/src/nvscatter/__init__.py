"""Zero-energy scattering transform for 2-D Schrödinger operators with
conductivity-type potentials, its ∂̄ inverse and the scattering-data flow of
the Novikov-Veselov equation."""
from .conductivity import Conductivity, Potential, bump_gamma, compute_w, potential_from_gamma, verify_decay
from .config import ExperimentConfig
from .dbar import liouville_certificate, reconstruct_gamma_sqrt, reconstruct_v, solve_dbar
from .faddeev import FaddeevField, ResonanceError, SolverError, solve_mu
from .grid import ComplexField, GridSpec, make_grid
from .nvdyn import phase_gap, soliton_certificate, traveling_wave_residual
from .scattering import KGrid, ScatteringData, compute_b, continuity_proxy, evolve_b, forward_transform, shift_b

__version__ = "0.1.0"

__all__ = ["Conductivity", "Potential", "bump_gamma", "compute_w", "potential_from_gamma",
           "verify_decay", "ExperimentConfig", "liouville_certificate", "reconstruct_gamma_sqrt",
           "reconstruct_v", "solve_dbar", "FaddeevField", "ResonanceError", "SolverError",
           "solve_mu", "ComplexField", "GridSpec", "make_grid", "phase_gap",
           "soliton_certificate", "traveling_wave_residual", "KGrid", "ScatteringData",
           "compute_b", "continuity_proxy", "evolve_b", "forward_transform", "shift_b"]
