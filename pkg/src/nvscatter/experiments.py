"""Config-driven pipeline runs writing binary fields, CSV exports and a JSON
report into an output directory."""
from __future__ import annotations

import hashlib
import json
import logging
import os
from pathlib import Path

import numpy as np

from . import io
from .conductivity import bump_gamma, compute_w, potential_from_gamma, verify_decay
from .config import ExperimentConfig
from .dbar import liouville_certificate, reconstruct_gamma_sqrt, reconstruct_v, smooth_noise, solve_dbar
from .grid import make_grid
from .nvdyn import soliton_certificate, velocity_grid
from .scattering import (KGrid, ScatteringData, continuity_proxy, evolve_b, forward_transform,
                         shift_b, verify_shift_lemma)

log = logging.getLogger(__name__)


def sha(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()[:16]


def to_jsonable(x):
    if isinstance(x, dict):
        return {str(k): to_jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [to_jsonable(v) for v in x]
    if isinstance(x, (complex, np.complexfloating)):
        return [float(x.real), float(x.imag)]
    if isinstance(x, np.ndarray):
        return to_jsonable(x.tolist())
    if isinstance(x, (np.bool_,)):
        return bool(x)
    if isinstance(x, np.integer):
        return int(x)
    if isinstance(x, np.floating):
        return float(x)
    return x


def dump_report(report: dict) -> str:
    return json.dumps(to_jsonable(report), sort_keys=True, indent=2) + "\n"


class Run:
    """Output directory bookkeeping: artifacts are written once, hashed and
    listed in the report."""

    def __init__(self, outdir):
        self.out = Path(outdir)
        self.out.mkdir(parents=True, exist_ok=True)
        self.artifacts = {}

    def write(self, name: str, data: bytes | str) -> Path:
        raw = data.encode() if isinstance(data, str) else data
        path = self.out / name
        path.write_bytes(raw)
        self.artifacts[name] = sha(raw)
        return path

    def field(self, name: str, f):
        raw = io.encode_nvs1(f)
        self.write(name + ".nvs1", raw)
        self.write(name + ".csv", io.export_csv(raw))

    def data(self, name: str, s: ScatteringData):
        raw = io.encode_nvb1(s)
        self.write(name + ".nvb1", raw)
        self.write(name + ".csv", io.export_csv(raw))


def _potential(cfg: ExperimentConfig, run: Run | None = None):
    grid = make_grid(cfg.L, cfg.N)
    c = bump_gamma(grid, cfg.A, cfg.sigma, cfg.center, cfg.delta0)
    p = potential_from_gamma(c, cfg.identity_tol)
    q = cfg.decay_q
    if q is None:
        q = 1e3 * max(float(np.abs(p.v.values).max()), 1e-300)
    decays = verify_decay(p, q, cfg.decay_eps)
    if run is not None:
        run.field("gamma", c.gamma)
        run.field("v", p.v)
    return grid, c, p, decays


def _forward(cfg, p, diagnostics=False):
    kg = KGrid(cfg.K, cfg.M, k_min=cfg.k_min)
    kw = cfg.solver_kwargs()
    return forward_transform(p, kg, threads=cfg.threads, diagnostics=diagnostics, **kw)


def _inverse_v(s, p, grid, cfg, run) -> dict:
    # v from the ∂̄ solution at the innermost k ring
    kg = s.kgrid
    ring = np.argwhere(np.isclose(np.abs(kg.k), np.abs(kg.k).min()))[0]
    k = kg.k[tuple(ring)]
    out = {"v_k": k}
    mu = solve_dbar(s, grid.z.ravel(), cfg.R)[:, ring[0], ring[1]]
    try:
        pv = reconstruct_v(mu.reshape(grid.N, grid.N), k, grid)
    except ValueError as e:
        log.warning("v not reconstructed: %s", e)
        return dict(out, v_rel_l2_error=None, v_skipped=str(e))
    run.field("v_rec", pv.v)
    inside = np.abs(grid.z) <= pv.meta["radius"]
    nv = np.linalg.norm(p.v.values[inside])
    diff = np.linalg.norm((pv.v.values - p.v.values)[inside])
    return dict(out, v_rel_l2_error=float(diff / nv) if nv else float(diff),
                v_radius=pv.meta["radius"])


def run_experiment(cfg: ExperimentConfig) -> dict:
    """Run the experiment named in ``cfg`` and write its artifacts.

    Returns the report (also written as ``report.json``).
    """
    cfg.validate()
    run = Run(cfg.outdir)
    run.write("config.json", cfg.to_json() + "\n")
    report = {"experiment": cfg.experiment}
    name = cfg.experiment
    grid, c, p, decays = _potential(cfg, run)
    report["potential"] = {"decay_certified": decays, "certificate": p.certificate,
                           "identity_residual": p.meta["identity_residual"],
                           "sup_v": float(np.abs(p.v.values).max())}
    if name == "potential":
        w = compute_w(p, cfg.w_tol)
        run.field("w", w)
        report["w"] = dict(w.meta)
    elif name == "gen-conductivity":
        report["gamma"] = {"min": float(c.gamma.values.real.min()),
                           "max": float(c.gamma.values.real.max())}
    elif name in ("forward", "shift", "evolve", "invert", "liouville", "soliton-certificate",
                  "roundtrip", "verify-shift"):
        s = _forward(cfg, p, diagnostics=name in ("forward", "roundtrip"))
        run.data("b", s)
        report["b"] = {"sup": s.sup(), "provenance": s.provenance}
        if name in ("forward", "roundtrip"):
            d = s.provenance.get("diagnostics", [])
            report["faddeev"] = {
                "max_pde_residual": max((x.get("pde_residual", 0.0) for x in d), default=0.0),
                "max_boundary_deviation": max((x["boundary_deviation"] for x in d), default=0.0),
                "max_iterations": max((x["solver_iterations"] for x in d), default=0)}
            s.provenance.pop("diagnostics", None)
            report["continuity"] = continuity_proxy(s)
        if name == "shift":
            sy = shift_b(s, cfg.shift)
            run.data("b_shifted", sy)
            report["shift"] = {"y": cfg.y}
        if name == "evolve":
            st = evolve_b(s, cfg.t)
            run.data("b_evolved", st)
            dev = float(np.abs(np.abs(st.b) - np.abs(s.b)).max())
            report["evolve"] = {"t": cfg.t, "modulus_deviation": dev}
        if name == "verify-shift":
            r = verify_shift_lemma(p, cfg.shift, s.kgrid, base=s, threads=cfg.threads,
                                   leak_tol=cfg.leak_tol,
                                   **cfg.solver_kwargs())
            r["pass"] = r["max_rel_error"] <= cfg.shift_tol
            report["verify_shift"] = r
        if name in ("invert", "roundtrip"):
            g = reconstruct_gamma_sqrt(s, grid, cfg.R, tol=cfg.dbar_tol, maxiter=cfg.dbar_maxiter)
            run.field("gamma_sqrt_rec", g)
            true = np.sqrt(c.gamma.values.real)
            err = float(np.linalg.norm(g.values.real - true) / np.linalg.norm(true))
            report["inverse"] = {"rel_l2_error": err, **g.meta}
            if name == "roundtrip":
                report["inverse"].update(_inverse_v(s, p, grid, cfg, run))
        if name == "liouville":
            rng = np.random.default_rng(int(os.environ.get("NVS_SEED", cfg.seed)))
            noisy = ScatteringData(s.kgrid, cfg.liouville_eps * smooth_noise(s.kgrid, rng))
            zero = ScatteringData(s.kgrid, np.zeros_like(s.b0))
            report["liouville"] = {
                "noise": liouville_certificate(noisy, cfg.liouville_tol, grid=grid, R=cfg.R),
                "zero": liouville_certificate(zero, 0.0, grid=grid, R=cfg.R)}
        if name == "soliton-certificate":
            cs = velocity_grid(cfg.c_box[0], cfg.c_box[1], cfg.c_samples)
            cert = soliton_certificate(None, cs, data=s)
            rows = cert.pop("samples")
            lines = ["c1,c2,sup_res,l2_res"] + [
                ",".join(format(r[k], ".17g") for k in ("c1", "c2", "sup_res", "l2_res"))
                for r in rows]
            run.write("soliton.csv", "\n".join(lines) + "\n")
            report["soliton"] = cert
    report["artifacts"] = dict(sorted(run.artifacts.items()))
    run.write("report.json", dump_report(report))
    return report
