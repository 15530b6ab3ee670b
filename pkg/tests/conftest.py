import numpy as np
import pytest

from gibbswalk import Alphabet, CylinderFunction, GibbsStream, Potential
from gibbswalk.decompose import DecomposerConfig, decompose


@pytest.fixture(scope="session")
def ab():
    return Alphabet(2)


@pytest.fixture(scope="session")
def uniform_stream(ab):
    return GibbsStream(Potential.zero(ab))


@pytest.fixture(scope="session")
def random_potential(ab):
    rng = np.random.default_rng(12345)
    table = {(s,): float(v) for s, v in zip(ab.letters, rng.uniform(-0.5, 0.8, 4))}
    return Potential(ab, 1, table)


@pytest.fixture(scope="session")
def random_stream(random_potential):
    return GibbsStream(random_potential)


@pytest.fixture(scope="session")
def stream_m2(ab):
    rng = np.random.default_rng(777)
    table = {w: float(v) for w, v in zip(ab.reduced_words(2), rng.uniform(0.0, 0.9, 12))}
    return GibbsStream(Potential(ab, 2, table))


@pytest.fixture(scope="session")
def ones_target(ab):
    return CylinderFunction.constant(ab, 1.0)


@pytest.fixture(scope="session")
def step_target(ab, uniform_stream):
    raw = CylinderFunction.from_table(ab, 2, {(0, 0): 1.25}, default=1.0)
    return raw * (1.0 / raw.integral(uniform_stream.mass_array(2)))


@pytest.fixture(scope="session")
def uniform_decomposition(ones_target, uniform_stream):
    return decompose(ones_target, uniform_stream, DecomposerConfig())


@pytest.fixture(scope="session")
def step_decomposition(step_target, uniform_stream):
    return decompose(step_target, uniform_stream,
                     DecomposerConfig(stage_cap=40, target_l1=1e-2, max_shell=5))
