import numpy as np
import pytest

from oscsim import OscillatorSystem


def random_pd_system(n, rng, ic_scale=1.0):
    """Random oscillator with positive wall springs everywhere (PD incidence)."""
    g = np.abs(rng.standard_normal((n, n)))
    g = 0.5 * (g + g.T)
    g += np.diag(np.abs(rng.standard_normal(n)) + 0.5)
    m = rng.uniform(0.5, 2.0, n)
    x0 = ic_scale * rng.standard_normal(n)
    v0 = ic_scale * rng.standard_normal(n)
    return OscillatorSystem(m, g, x0, v0)


@pytest.fixture
def rng():
    return np.random.default_rng(42)
