import pytest
from hypothesis import given, settings, strategies as st

from nvscatter.config import EXPERIMENTS, ConfigError, ExperimentConfig


def test_defaults_validate():
    cfg = ExperimentConfig().validate()
    assert cfg.L == 8.0 and cfg.N == 64 and cfg.K == 2.0 and cfg.M == 16
    assert cfg.center == 0j and cfg.shift == 1 + 0.5j


@settings(max_examples=40, deadline=None)
@given(st.sampled_from(EXPERIMENTS), st.floats(1, 32), st.sampled_from([16, 32, 64, 128]),
       st.floats(1e-14, 1e-2), st.integers(0, 8), st.floats(-0.5, 5))
def test_json_roundtrip(exp, L, N, tol, threads, A):
    cfg = ExperimentConfig(experiment=exp, L=L, N=N, tol=tol, threads=threads, A=A)
    back = ExperimentConfig.from_json(cfg.to_json())
    assert back == cfg
    assert back.to_json() == cfg.to_json()


@pytest.mark.parametrize("field,value", [
    ("experiment", "nope"), ("N", 63), ("N", 4), ("L", 0.0), ("M", 3), ("K", -1.0),
    ("sigma", 5.0), ("A", -1.0), ("method", "lu"), ("tol", 0.0), ("R", 5.0),
    ("c_box", [1.0, -1.0]), ("c_samples", 1), ("threads", -1), ("y", [1.0]), ("k_min", 0.5),
])
def test_validation_rejects(field, value):
    with pytest.raises(ConfigError):
        ExperimentConfig(**{field: value}).validate()


def test_unknown_keys_rejected():
    with pytest.raises(ConfigError):
        ExperimentConfig.from_json('{"N": 32, "bogus": 1}')


def test_solver_kwargs_cover_tolerances():
    kw = ExperimentConfig().solver_kwargs()
    assert {"tol", "maxiter", "restart", "residual_tol", "boundary_tol", "k_min",
            "kappa_max", "method"} <= set(kw)
