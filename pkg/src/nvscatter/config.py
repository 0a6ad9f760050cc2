"""Experiment configuration: every tunable of the pipeline with its default,
serialised as JSON."""
from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field, fields

EXPERIMENTS = ("gen-conductivity", "potential", "forward", "shift", "evolve", "verify-shift",
               "invert", "liouville", "soliton-certificate", "roundtrip")
METHODS = ("iterative", "dense")


class ConfigError(ValueError):
    pass


@dataclass
class ExperimentConfig:
    experiment: str = "roundtrip"
    outdir: str = "nvs_out"
    # z-grid
    L: float = 8.0
    N: int = 64
    # k-grid
    K: float = 2.0
    M: int = 16
    k_min: float = 0.1
    # conductivity bump
    A: float = 1.0
    sigma: float = 1.0
    z0: list = field(default_factory=lambda: [0.0, 0.0])
    delta0: float = 1e-3
    identity_tol: float = 1e-8
    w_tol: float = 1e-6
    # Lippmann-Schwinger solver
    method: str = "iterative"
    tol: float = 1e-10
    maxiter: int = 500
    restart: int = 100
    kappa_max: float = 0.4
    residual_tol: float = 1e-6
    boundary_tol: float = 1e-2
    # ∂̄ solver
    R: float | None = None
    dbar_tol: float = 1e-12
    dbar_maxiter: int = 400
    # decay certificate
    decay_q: float | None = None
    decay_eps: float = 0.5
    # phase laws and experiments
    y: list = field(default_factory=lambda: [1.0, 0.5])
    t: float = 1.0
    shift_tol: float = 1e-3
    leak_tol: float = 1e-4
    liouville_eps: float = 1e-6
    liouville_tol: float = 1e-5
    c_box: list = field(default_factory=lambda: [-10.0, 10.0])
    c_samples: int = 21
    threads: int = 1
    seed: int = 0

    def validate(self) -> "ExperimentConfig":
        err = []
        if self.experiment not in EXPERIMENTS:
            err.append(f"experiment must be one of {EXPERIMENTS}")
        if not self.L > 0:
            err.append("L must be positive")
        if int(self.N) != self.N or self.N % 2 or self.N < 8:
            err.append("N must be an even integer >= 8")
        if not self.K > 0:
            err.append("K must be positive")
        if int(self.M) != self.M or self.M % 2 or self.M < 2:
            err.append("M must be an even integer >= 2")
        if not self.k_min > 0:
            err.append("k_min must be positive")
        elif self.K / self.M * 2 ** 0.5 < self.k_min:
            err.append("innermost k node falls below k_min")
        if not self.sigma > 0 or self.sigma > self.L / 4:
            err.append("sigma must lie in (0, L/4]")
        if not self.delta0 > 0 or 1 + min(self.A, 0) < self.delta0:
            err.append("1 + A must stay above delta0 > 0")
        if self.method not in METHODS:
            err.append(f"method must be one of {METHODS}")
        for name in ("tol", "kappa_max", "residual_tol", "boundary_tol", "dbar_tol",
                     "shift_tol", "leak_tol", "identity_tol", "w_tol", "liouville_eps", "liouville_tol", "decay_eps"):
            if not getattr(self, name) > 0:
                err.append(f"{name} must be positive")
        if self.R is not None and not 0 < self.R <= self.K:
            err.append("R must lie in (0, K]")
        if len(self.c_box) != 2 or not self.c_box[0] < self.c_box[1]:
            err.append("c_box must be [lo, hi] with lo < hi")
        if self.c_samples < 2:
            err.append("c_samples must be at least 2")
        if self.threads < 0:
            err.append("threads must be >= 0")
        if len(self.z0) != 2 or len(self.y) != 2:
            err.append("z0 and y are [re, im] pairs")
        if err:
            raise ConfigError("; ".join(err))
        return self

    @property
    def center(self) -> complex:
        return complex(*self.z0)

    @property
    def shift(self) -> complex:
        return complex(*self.y)

    def solver_kwargs(self) -> dict:
        return {"method": self.method, "tol": self.tol, "maxiter": self.maxiter,
                "restart": self.restart, "residual_tol": self.residual_tol,
                "boundary_tol": self.boundary_tol, "k_min": self.k_min,
                "kappa_max": self.kappa_max}

    def to_json(self) -> str:
        return json.dumps(asdict(self), sort_keys=True, indent=2)

    @classmethod
    def from_json(cls, text: str) -> "ExperimentConfig":
        raw = json.loads(text)
        known = {f.name for f in fields(cls)}
        extra = set(raw) - known
        if extra:
            raise ConfigError(f"unknown config keys: {sorted(extra)}")
        return cls(**raw)
