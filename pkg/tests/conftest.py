import numpy as np
import pytest

from uniform_lse.design import summarize
from uniform_lse.simulate import IidUniform, SimConfig, UniformNoise, design_x

# The canonical demo setup used throughout: n=10 covariates drawn once,
# uniformly in [-10, 10], true line y = 7 + 4x, uniform noise with theta=3.
DEMO_SEED = 42


def demo_config(replicates: int = 1000, **overrides) -> SimConfig:
    kwargs = dict(
        n=10,
        x_spec=IidUniform(-10.0, 10.0),
        beta0=7.0,
        beta1=4.0,
        noise=UniformNoise(3.0),
        replicates=replicates,
        seed=DEMO_SEED,
    )
    kwargs.update(overrides)
    return SimConfig(**kwargs)


@pytest.fixture(scope="session")
def demo_x():
    return design_x(demo_config())


@pytest.fixture(scope="session")
def demo_design(demo_x):
    return summarize(demo_x)


@pytest.fixture()
def rng():
    return np.random.default_rng(1234)
