"""
Pytest configuration and fixtures for schur_realization tests.
"""

import json
from pathlib import Path
from tempfile import TemporaryDirectory

import numpy as np
import pytest

from schur_realization.colligation import OperatorTuple, OutputPair
from schur_realization.config import SamplingConfig
from schur_realization.kernels import Kernel
from schur_realization.numerics import Tolerances
from schur_realization.serialization import colligation_to_dict, pair_to_dict
from schur_realization.worked_examples import (
    example_colligation,
    example_pair,
    example_schur,
    permutation_colligation,
)


@pytest.fixture
def temp_dir():
    """Provide a temporary directory for tests."""
    with TemporaryDirectory() as tmpdir:
        yield Path(tmpdir)


@pytest.fixture
def rng():
    """Provide a seeded generator."""
    return np.random.default_rng(20240601)


@pytest.fixture
def tol():
    """Provide default tolerances."""
    return Tolerances()


@pytest.fixture
def cfg():
    """Provide default sampling settings."""
    return SamplingConfig()


@pytest.fixture
def small_cfg():
    """Provide a smaller sample for the slower pipelines."""
    return SamplingConfig(sample_count=30)


@pytest.fixture
def u0():
    """Provide the coisometric 7 x 10 colligation of the worked example."""
    return example_colligation()


@pytest.fixture
def schur33():
    """Provide the closed-form worked-example function."""
    return example_schur()


@pytest.fixture
def pair0():
    """Provide the output pair (C, A_0)."""
    return example_pair(0.0)


@pytest.fixture
def pair02():
    """Provide the output pair (C, A_0.2)."""
    return example_pair(0.2)


@pytest.fixture
def permutation():
    """Provide the unitary colligation realizing S = [l1, l2]."""
    return permutation_colligation(2)


def random_contractive_pair(
    rng: np.random.Generator, d: int, dim_x: int, dim_y: int, norm: float = 0.9
) -> OutputPair:
    """Random pair with ||[A; C]|| = norm."""
    stacked = rng.standard_normal((d * dim_x + dim_y, dim_x)) + 1j * rng.standard_normal(
        (d * dim_x + dim_y, dim_x)
    )
    stacked *= norm / np.linalg.norm(stacked, 2)
    a = tuple(stacked[j * dim_x:(j + 1) * dim_x] for j in range(d))
    return OutputPair(stacked[d * dim_x:], OperatorTuple(a))


@pytest.fixture
def make_pair(rng):
    """Provide a factory of seeded random contractive pairs."""

    def _make(d, dim_x, dim_y, norm=0.9):
        return random_contractive_pair(rng, d, dim_x, dim_y, norm)

    return _make


@pytest.fixture
def write_json(temp_dir):
    """Write an object as JSON into the temporary directory and return the path."""

    def _write(name, data):
        path = temp_dir / name
        with open(path, "w") as f:
            json.dump(data, f, indent=2)
        return path

    return _write


@pytest.fixture
def u0_file(write_json, u0):
    """Provide the worked-example colligation as a file."""
    return write_json("u0.json", colligation_to_dict(u0))


@pytest.fixture
def pair02_file(write_json, pair02):
    """Provide the pair (C, A_0.2) as a file."""
    return write_json("pair_gamma02.json", pair_to_dict(pair02))


@pytest.fixture
def pair0_file(write_json, pair0):
    """Provide the pair (C, A_0) as a file."""
    return write_json("pair_gamma0.json", pair_to_dict(pair0))


@pytest.fixture
def s33_file(write_json):
    """Provide the closed-form worked-example function as a file."""
    return write_json("s33.json", {"kind": "example33"})


class DiagonalKernel(Kernel):
    """Scalar kernel with prescribed values on the diagonal of a sample and zero elsewhere."""

    def __init__(self, diagonal):
        super().__init__(1, 1)
        self.diagonal = diagonal

    def __call__(self, lam, zeta):
        value = self.diagonal[lam] if lam == zeta else 0.0
        return np.array([[value]], dtype=complex)


@pytest.fixture
def diagonal_kernel():
    """Provide a factory of kernels with a prescribed diagonal Gram."""
    return DiagonalKernel
