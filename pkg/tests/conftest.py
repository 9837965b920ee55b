import numpy as np
import pytest
from hypothesis import HealthCheck, settings

settings.register_profile("default", deadline=None, max_examples=30,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def random_assemblage(rng, n_x=2, n_a=2, d=2, rho=None):
    """Assemblage from random measurements on one ancilla-purified state."""
    from thermosteer.linalg import random_density, random_unitary
    from thermosteer.objects import Assemblage
    rho = random_density(d, rng) if rho is None else rho
    w, v = np.linalg.eigh(rho)
    sq = (v * np.sqrt(np.clip(w, 0, None))) @ v.conj().T
    sig = np.empty((n_x, n_a, d, d), dtype=complex)
    for x in range(n_x):
        U = random_unitary(d, rng)
        # random POVM via a Naimark-style split of a random unitary's columns
        weights = rng.dirichlet(np.ones(n_a), size=d)
        for a in range(n_a):
            E = (U * weights[:, a]) @ U.conj().T
            sig[x, a] = sq @ E.T @ sq
    return Assemblage(sig)
