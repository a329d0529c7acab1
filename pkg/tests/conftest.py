"""Shared test scenarios: linear matrices and two-sex model configurations."""

from __future__ import annotations

import numpy as np
import pytest

from conerad import ConeVector, build_model, from_matrix


def single_cell_config(beta: float = 2.0, s_f: float = 0.5, s_m: float = 0.5,
                       q: float = 0.5) -> dict:
    return {
        "grid": {"kind": "interval1d", "a": 0.0, "b": 1.0, "n_cells": 1},
        "dispersal": {"kind": "local"},
        "survival": {"female": s_f, "male": s_m},
        "sex_ratio": q,
        "mating": {"kind": "harmonic_mean", "beta": beta},
    }


def two_patch_config(beta: float = 2.0) -> dict:
    cfg = single_cell_config(beta=beta)
    cfg["grid"] = {"kind": "interval1d", "a": 0.0, "b": 2.0, "n_cells": 2}
    return cfg


def gaussian_config(n_cells: int = 40, sigma: float = 0.1, beta: float = 2.0,
                    s_f: float = 0.5, s_m: float = 0.5, q: float = 0.5) -> dict:
    return {
        "grid": {"kind": "interval1d", "a": 0.0, "b": 1.0, "n_cells": n_cells},
        "dispersal": {"kind": "gaussian", "sigma": sigma},
        "survival": {"female": s_f, "male": s_m},
        "sex_ratio": q,
        "mating": {"kind": "harmonic_mean", "beta": beta},
    }


def random_scenario(rng: np.random.Generator) -> dict:
    n = int(rng.integers(15, 35))
    beta = rng.uniform(0.5, 2.5, size=n)
    return {
        "grid": {"kind": "interval1d", "a": 0.0, "b": 1.0, "n_cells": n},
        "dispersal": {"kind": "gaussian", "sigma": float(rng.uniform(0.05, 0.3))},
        "survival": {"female": float(rng.uniform(0.3, 0.9)),
                     "male": float(rng.uniform(0.3, 0.9))},
        "sex_ratio": float(rng.uniform(0.3, 0.7)),
        "mating": {"kind": "harmonic_mean", "beta": [float(b) for b in beta]},
    }


def scale_beta(cfg: dict, factor: float) -> dict:
    out = {k: (dict(v) if isinstance(v, dict) else v) for k, v in cfg.items()}
    mat = out["mating"]
    for key in ("beta", "beta1", "beta2"):
        if key in mat:
            val = mat[key]
            mat[key] = [v * factor for v in val] if isinstance(val, list) else val * factor
    return out


def random_cone_vector(rng: np.random.Generator, n: int) -> ConeVector:
    return ConeVector(np.abs(rng.standard_normal(n)))


def random_positive_matrix(rng: np.random.Generator, n: int) -> np.ndarray:
    return rng.uniform(0.05, 1.0, size=(n, n))


@pytest.fixture
def rng():
    return np.random.default_rng(20260811)


@pytest.fixture
def diag21():
    return from_matrix(np.diag([2.0, 1.0]))


@pytest.fixture
def swap():
    return from_matrix(np.array([[0.0, 1.0], [1.0, 0.0]]))


@pytest.fixture
def single_cell_model():
    return build_model(single_cell_config())


@pytest.fixture
def two_patch_model():
    return build_model(two_patch_config())


@pytest.fixture
def gaussian_model():
    return build_model(gaussian_config())
