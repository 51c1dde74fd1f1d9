from pathlib import Path

import numpy as np
import pytest

from carleson import expr as ex
from carleson.measure import Atom, AtomFamily, Measure
from carleson.space import SpacePair

FIXTURES = Path(__file__).parent / "fixtures"


def geometric_space(N, ratio=2.0, weight=lambda n: 1.0):
    return SpacePair.from_values([ratio ** n for n in range(1, N + 1)],
                                 [weight(n) for n in range(1, N + 1)])


def family(w_expr, lo=2, hi=40, z_expr="2^n+1"):
    return Measure((AtomFamily(lo, hi, ex.parse_expr(z_expr), ex.parse_expr(w_expr)),))


def random_atomic(rng, space, count, spread=0.6):
    """Atoms scattered near random nodes, never on Gamma."""
    g = space.gamma.entries
    atoms = []
    for _ in range(count):
        k = rng.integers(space.N)
        r = abs(g[k]) * (1 + spread * rng.uniform(-0.5, 0.5))
        z = r * np.exp(2j * np.pi * rng.uniform())
        atoms.append(Atom(z, rng.uniform(0.1, 2.0) / (1 + r * r) * rng.uniform(0.5, 4)))
    return Measure(tuple(atoms))


def random_space(rng, N, lo=1.5, hi=3.0, beta_max=1.5):
    ratios = rng.uniform(lo, hi, size=N)
    mods = np.cumprod(ratios)
    phases = np.exp(2j * np.pi * rng.uniform(size=N))
    beta = rng.uniform(0.0, beta_max)
    return SpacePair.from_values(mods * phases, mods ** beta)


@pytest.fixture
def s1():
    return geometric_space(40)


@pytest.fixture
def s64():
    return geometric_space(64)


@pytest.fixture
def fixture_c():
    return family("4^(-n)")


@pytest.fixture
def fixture_nc():
    return family("1")


@pytest.fixture
def rng():
    return np.random.default_rng(20241019)
