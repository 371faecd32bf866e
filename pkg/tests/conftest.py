from functools import lru_cache

import numpy as np
import pytest

from confdefo.conformal import conformal_space
from confdefo.zoo import ZooSpec, generate


@lru_cache(maxsize=None)
def _cached(spec):
    mesh, f = generate(spec)
    f.setflags(write=False)
    return mesh, f


def zoo(name, *params, **kw):
    """Cached zoo mesh; ``perturbed=base`` wraps a base spec."""
    base = kw.pop("base", None)
    if base is not None:
        kw["base"] = ZooSpec(base) if isinstance(base, str) else base
    return _cached(ZooSpec(name, tuple(params), **kw))


def random_conformal(mesh, f, rng):
    """A random element of the conformal deformation space."""
    cs = conformal_space(mesh, f, cross_check=False)
    return (cs.basis @ rng.standard_normal(cs.dimension)).reshape(f.shape)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(scope="session")
def octahedron():
    return zoo("octahedron")


@pytest.fixture(scope="session")
def tetrahedron():
    return zoo("tetrahedron")


@pytest.fixture(scope="session")
def jessen():
    return zoo("jessen")


@pytest.fixture(scope="session")
def disk():
    return zoo("planar_disk")


@pytest.fixture(scope="session")
def bumpy_octahedron():
    return zoo("perturbed", base="octahedron", seed=7, magnitude=0.05)


@pytest.fixture(scope="session")
def bumpy_torus():
    return zoo("perturbed", base=ZooSpec("torus", (8, 8)), seed=1, magnitude=0.05)


def pytest_terminal_summary(terminalreporter):
    mod = __import__("sys").modules.get("test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(mod.RESULTS):
        terminalreporter.write_line(mod.RESULTS[n])
