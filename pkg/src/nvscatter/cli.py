"""``nvs`` command-line front end.

Exit codes: 0 success, 2 invalid input or configuration, 3 numerical failure.
Failures print one JSON line ``{"error": ..., "reason": ...}`` on stderr.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

import numpy as np

from . import io
from .conductivity import Conductivity, Potential, bump_gamma, compute_w, potential_from_gamma, verify_decay
from .config import ConfigError, ExperimentConfig
from .dbar import liouville_certificate, reconstruct_gamma_sqrt, reconstruct_v, innermost_ring, solve_dbar
from .experiments import dump_report, run_experiment
from .faddeev import SolverError, solve_mu
from .grid import make_grid
from .nvdyn import soliton_certificate, velocity_grid
from .scattering import KGrid, evolve_b, forward_transform, shift_b, verify_shift_lemma

log = logging.getLogger("nvscatter")

EXIT_INPUT = 2
EXIT_NUMERIC = 3


class UsageError(ValueError):
    pass


def complex_arg(text: str) -> complex:
    try:
        parts = [float(x) for x in text.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected re,im but got {text!r}")
    if len(parts) == 1:
        parts.append(0.0)
    if len(parts) != 2:
        raise argparse.ArgumentTypeError(f"expected re,im but got {text!r}")
    return complex(*parts)


def _potential(path) -> Potential:
    return Potential(io.read_field(path))


def _write_json(path, obj):
    text = dump_report(obj)
    if path in (None, "-"):
        sys.stdout.write(text)
    else:
        Path(path).write_text(text)


def _solver(a) -> dict:
    return {"method": a.method, "tol": a.tol, "maxiter": a.maxiter}


# -- subcommands -------------------------------------------------------------

def cmd_gen_conductivity(a):
    grid = make_grid(a.L, a.N)
    c = bump_gamma(grid, a.A, a.sigma, a.center, a.delta0)
    io.write_field(a.out, c.gamma)


def cmd_potential(a):
    c = Conductivity(io.read_field(a.gamma))
    p = potential_from_gamma(c)
    io.write_field(a.out, p.v)
    out = {"identity_residual": p.meta["identity_residual"]}
    if a.verify_decay:
        q, eps = a.verify_decay
        out["decay_certified"] = verify_decay(p, q, eps)
        if not out["decay_certified"]:
            raise ArithmeticError(f"potential does not satisfy |v| <= {q}(1+|z|)^(-2-{eps})")
    if a.emit_w:
        w = compute_w(p, a.w_tol)
        io.write_field(a.emit_w, w)
        out["w"] = w.meta
    print(json.dumps(out, sort_keys=True))


def cmd_mu(a):
    p = _potential(a.v)
    f = solve_mu(p, a.k, **_solver(a))
    io.write_field(a.out, f.mu)
    d = dict(f.diagnostics, k=[a.k.real, a.k.imag], accepted=f.accepted)
    print(json.dumps(json.loads(dump_report(d)), sort_keys=True))
    if not f.accepted:
        log.warning("mu at k=%s failed its residual or boundary check", a.k)


def cmd_forward(a):
    p = _potential(a.v)
    s = forward_transform(p, KGrid(a.K, a.M, k_min=a.k_min), threads=a.threads, **_solver(a))
    io.write_data(a.out, s)


def _out(a, suffix):
    return a.out or str(Path(a.b).with_name(Path(a.b).stem + suffix + ".nvb1"))


def cmd_shift(a):
    io.write_data(_out(a, "_shifted"), shift_b(io.read_data(a.b), a.y))


def cmd_evolve(a):
    io.write_data(_out(a, "_evolved"), evolve_b(io.read_data(a.b), a.t))


def cmd_verify_shift(a):
    p = _potential(a.v)
    r = verify_shift_lemma(p, a.y, KGrid(a.K, a.M, k_min=a.k_min), threads=a.threads,
                           **_solver(a))
    r["tol"] = a.shift_tol
    r["pass"] = r["max_rel_error"] <= a.shift_tol
    _write_json(a.report, r)
    if not r["pass"]:
        raise ArithmeticError(f"shift law error {r['max_rel_error']:.2e} exceeds {a.shift_tol}")


def cmd_invert(a):
    s = io.read_data(a.b)
    grid = make_grid(a.L, a.N)
    g = reconstruct_gamma_sqrt(s, grid, a.R)
    io.write_field(a.out, g)
    if a.emit_v:
        ring = np.argwhere(innermost_ring(s.kgrid))[0]
        k = s.kgrid.k[tuple(ring)]
        mu = solve_dbar(s, grid.z.ravel(), a.R)[:, ring[0], ring[1]]
        io.write_field(a.emit_v, reconstruct_v(mu.reshape(grid.N, grid.N), k, grid).v)
    print(json.dumps(json.loads(dump_report(g.meta)), sort_keys=True))


def cmd_liouville(a):
    s = io.read_data(a.b)
    grid = make_grid(a.L, a.N) if a.N else None
    _write_json(a.report, liouville_certificate(s, a.tol, grid=grid, R=a.R))


def cmd_soliton(a):
    p = _potential(a.v)
    cs = velocity_grid(a.cbox[0], a.cbox[1], a.csamples)
    cert = soliton_certificate(p, cs, kg=KGrid(a.K, a.M, k_min=a.k_min), threads=a.threads,
                               **_solver(a))
    rows = cert.pop("samples")
    csv_path = a.csv or str(Path(a.report if a.report not in (None, "-") else "cert").with_suffix(".csv"))
    lines = ["c1,c2,sup_res,l2_res"] + [
        ",".join(format(r[k], ".17g") for k in ("c1", "c2", "sup_res", "l2_res")) for r in rows]
    Path(csv_path).write_text("\n".join(lines) + "\n")
    cert["csv"] = csv_path
    _write_json(a.report, cert)


def cmd_run(a):
    if a.config:
        cfg = ExperimentConfig.from_json(Path(a.config).read_text())
    elif a.experiment:
        cfg = ExperimentConfig(experiment=a.experiment)
    else:
        raise UsageError("run needs --config")
    if a.experiment and cfg.experiment != a.experiment:
        raise UsageError(f"config selects {cfg.experiment!r}, not {a.experiment!r}")
    if a.outdir:
        cfg.outdir = a.outdir
    if a.threads_set:
        cfg.threads = a.threads
    rep = run_experiment(cfg)
    print(json.dumps({"outdir": cfg.outdir, "artifacts": rep["artifacts"]}, sort_keys=True))


def cmd_export_csv(a):
    text = io.export_csv(Path(a.file).read_bytes())
    if a.out:
        Path(a.out).write_text(text)
    else:
        sys.stdout.write(text)


def cmd_import_csv(a):
    Path(a.out).write_bytes(io.binary_from_csv(Path(a.file).read_text()))


def cmd_oracle(a):
    from . import oracle
    p = _potential(a.v)
    if a.what == "dense-mu":
        f = oracle.dense_mu(p, a.k)
        it = solve_mu(p, a.k, residual=False)
        diff = float(np.abs(f.values - it.mu.values).max())
        print(json.dumps({"k": [a.k.real, a.k.imag], "max_abs_diff": diff}))
    elif a.what == "brute-b":
        from .scattering import compute_b
        f = solve_mu(p, a.k, residual=False)
        fast, slow = compute_b(p, f), oracle.brute_b(p, f.mu, a.k)
        print(json.dumps({"k": [a.k.real, a.k.imag], "b": [fast.real, fast.imag],
                          "abs_diff": abs(fast - slow)}))
    else:
        f = solve_mu(p, a.k, residual=False)
        born = oracle.born_series(p, a.k, 1)
        print(json.dumps({"k": [a.k.real, a.k.imag],
                          "gap": float(np.abs(f.mu.values - born.values).max())}))


# -- parser ------------------------------------------------------------------

def _add_solver(sp):
    sp.add_argument("--method", choices=("iterative", "dense"), default="iterative")
    sp.add_argument("--tol", type=float, default=1e-10)
    sp.add_argument("--maxiter", type=int, default=500)


def _add_kgrid(sp, required=True):
    sp.add_argument("--K", type=float, required=required, default=2.0)
    sp.add_argument("--M", type=int, required=required, default=16)
    sp.add_argument("--k-min", type=float, default=0.1)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="nvs", description=__doc__.splitlines()[0])
    ap.add_argument("--threads", type=int, default=None,
                    help="worker threads for k sweeps (0 = one per core)")
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True, metavar="<subcommand>")

    sp = sub.add_parser("gen-conductivity", help="write a Gaussian bump conductivity")
    sp.add_argument("--A", type=float, default=1.0)
    sp.add_argument("--sigma", type=float, default=1.0)
    sp.add_argument("--center", type=complex_arg, default=0j)
    sp.add_argument("--delta0", type=float, default=1e-3)
    sp.add_argument("--L", type=float, default=8.0)
    sp.add_argument("--N", type=int, default=64)
    sp.add_argument("--out", required=True)
    sp.set_defaults(func=cmd_gen_conductivity)

    sp = sub.add_parser("potential", help="potential of a conductivity file")
    sp.add_argument("--gamma", required=True)
    sp.add_argument("--out", required=True)
    sp.add_argument("--verify-decay", nargs=2, type=float, metavar=("Q", "EPS"))
    sp.add_argument("--emit-w", metavar="PATH")
    sp.add_argument("--w-tol", type=float, default=1e-6)
    sp.set_defaults(func=cmd_potential)

    sp = sub.add_parser("mu", help="solve for mu at one k")
    sp.add_argument("--v", required=True)
    sp.add_argument("--k", type=complex_arg, required=True)
    sp.add_argument("--out", required=True)
    _add_solver(sp)
    sp.set_defaults(func=cmd_mu)

    sp = sub.add_parser("forward", help="scattering data on a k-grid")
    sp.add_argument("--v", required=True)
    _add_kgrid(sp)
    sp.add_argument("--out", required=True)
    _add_solver(sp)
    sp.set_defaults(func=cmd_forward)

    sp = sub.add_parser("shift", help="apply the translation phase law")
    sp.add_argument("--b", required=True)
    sp.add_argument("--y", type=complex_arg, required=True)
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_shift)

    sp = sub.add_parser("evolve", help="advance scattering data in time")
    sp.add_argument("--b", required=True)
    sp.add_argument("--t", type=float, required=True)
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_evolve)

    sp = sub.add_parser("verify-shift", help="check the translation phase law")
    sp.add_argument("--v", required=True)
    sp.add_argument("--y", type=complex_arg, required=True)
    _add_kgrid(sp, required=False)
    sp.add_argument("--shift-tol", type=float, default=1e-3)
    sp.add_argument("--report", default="-")
    _add_solver(sp)
    sp.set_defaults(func=cmd_verify_shift)

    sp = sub.add_parser("invert", help="reconstruct the conductivity root")
    sp.add_argument("--b", required=True)
    sp.add_argument("--L", type=float, required=True)
    sp.add_argument("--N", type=int, required=True)
    sp.add_argument("--out", required=True)
    sp.add_argument("--emit-v", metavar="PATH")
    sp.add_argument("--R", type=float)
    sp.set_defaults(func=cmd_invert)

    sp = sub.add_parser("liouville", help="certificate that small data keep mu near 1")
    sp.add_argument("--b", required=True)
    sp.add_argument("--tol", type=float, default=1e-8)
    sp.add_argument("--report", default="-")
    sp.add_argument("--L", type=float, default=8.0)
    sp.add_argument("--N", type=int, default=0, help="also reconstruct v on this grid")
    sp.add_argument("--R", type=float)
    sp.set_defaults(func=cmd_liouville)

    sp = sub.add_parser("soliton-certificate", help="traveling-wave residual floor")
    sp.add_argument("--v", required=True)
    sp.add_argument("--cbox", nargs=2, type=float, default=[-10.0, 10.0])
    sp.add_argument("--csamples", type=int, default=21)
    _add_kgrid(sp, required=False)
    sp.add_argument("--report", default="-")
    sp.add_argument("--csv")
    _add_solver(sp)
    sp.set_defaults(func=cmd_soliton)

    for name in ("roundtrip", "run"):
        sp = sub.add_parser(name, help="config-driven experiment" if name == "run"
                            else "forward and inverse transform of a bump")
        sp.add_argument("--config")
        sp.add_argument("--outdir")
        sp.set_defaults(func=cmd_run, experiment=None if name == "run" else name)

    sp = sub.add_parser("export-csv", help="CSV text of an NVS1/NVB1 file")
    sp.add_argument("file")
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_export_csv)

    sp = sub.add_parser("import-csv", help="binary file from a CSV export")
    sp.add_argument("file")
    sp.add_argument("--out", required=True)
    sp.set_defaults(func=cmd_import_csv)

    sp = sub.add_parser("oracle")  # debugging aid, not listed in help
    sp.add_argument("what", choices=("dense-mu", "brute-b", "born"))
    sp.add_argument("--v", required=True)
    sp.add_argument("--k", type=complex_arg, required=True)
    sp.set_defaults(func=cmd_oracle)
    sub._choices_actions = [c for c in sub._choices_actions if c.dest != "oracle"]
    return ap


def _fail(code: int, kind: str, exc: BaseException) -> int:
    sys.stderr.write(json.dumps({"error": kind, "type": type(exc).__name__,
                                 "reason": str(exc)}) + "\n")
    return code


def main(argv=None) -> int:
    ap = build_parser()
    a = ap.parse_args(argv)
    logging.basicConfig(level=logging.INFO if a.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    a.threads_set = a.threads is not None
    if a.threads is None:
        a.threads = 1
    if a.threads < 0:
        ap.error("--threads must be >= 0")
    try:
        a.func(a)
    except (ConfigError, io.FormatError, FileNotFoundError, UsageError) as e:
        return _fail(EXIT_INPUT, "input", e)
    except (SolverError, ArithmeticError, np.linalg.LinAlgError) as e:
        return _fail(EXIT_NUMERIC, "numerical", e)
    except ValueError as e:
        return _fail(EXIT_INPUT, "input", e)
    return 0


if __name__ == "__main__":
    sys.exit(main())
