import numpy as np
import pytest

import bhpfluct as bf

# Fixed seeds so every run of the suite sees the same draws; the sampler is
# deterministic by contract, so a tolerance that passes once passes always.
SEED_1E6 = 20240817
SEED_1E7 = 31415926


@pytest.fixture(scope="session")
def spectrum10() -> bf.LatticeSpectrum:
    return bf.laplacian_eigenvalues(10)


@pytest.fixture(scope="session")
def dist10(spectrum10) -> bf.BhpDistribution:
    return bf.tabulate(spectrum10)


@pytest.fixture(scope="session")
def draws_1e6(spectrum10) -> np.ndarray:
    return bf.sample(10**6, spectrum10, seed=SEED_1E6)


@pytest.fixture(scope="session")
def draws_1e7(spectrum10) -> np.ndarray:
    return bf.sample(10**7, spectrum10, seed=SEED_1E7)
