import itertools

import numpy as np
import pytest

from compforge.space import DesignSpace, Dimension, Stage


def make_space(*sizes: int, rules=()) -> DesignSpace:
    """Rule-light space with dimensions dim0..dimN of the given sizes."""
    stages = list(Stage)
    dims = tuple(
        Dimension(
            id=f"dim{i}",
            stage=stages[i % len(stages)],
            components=tuple(f"d{i}c{j}" for j in range(size)),
            baseline_index=0,
        )
        for i, size in enumerate(sizes)
    )
    return DesignSpace(name="test", dimensions=dims, rules=tuple(rules))


@pytest.fixture
def space222() -> DesignSpace:
    return make_space(2, 2, 2)


@pytest.fixture
def space322() -> DesignSpace:
    return make_space(3, 2, 2)


def full_factorial(space: DesignSpace):
    return list(itertools.product(*[range(d.size) for d in space.dimensions]))


def pool_map(configs):
    return {f"{i:04d}": tuple(c) for i, c in enumerate(configs)}


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20240817)
