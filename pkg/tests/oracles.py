"""Independent oracles: brute-force or textbook routes kept deliberately
separate from the library implementations they check."""

import math

import numpy as np


def dense_lattice_laplacian(L: int) -> np.ndarray:
    """Explicit N x N periodic-lattice Laplacian built edge by edge."""
    n = L * L
    matrix = np.zeros((n, n))

    def site(x: int, y: int) -> int:
        return (x % L) + L * (y % L)

    for x in range(L):
        for y in range(L):
            i = site(x, y)
            matrix[i, i] = 4.0
            for dx, dy in ((1, 0), (-1, 0), (0, 1), (0, -1)):
                matrix[i, site(x + dx, y + dy)] -= 1.0
    return matrix


def dense_nonzero_eigenvalues(L: int) -> np.ndarray:
    """Sorted eigenvalues of the explicit Laplacian, smallest (zero) mode dropped."""
    eigenvalues = np.linalg.eigvalsh(dense_lattice_laplacian(L))
    return np.sort(eigenvalues)[1:]


def one_pass_sigma(values) -> float:
    """Population sigma via the raw-moment formula, exact sums."""
    values = [float(v) for v in values]
    n = len(values)
    mean = math.fsum(values) / n
    second = math.fsum(v * v for v in values) / n
    return math.sqrt(max(second - mean * mean, 0.0))


def ks_double_loop(sample, grid, cdf_values) -> float:
    """Direct sup over every evaluation point, ECDF by brute counting."""
    sample = np.asarray(sample, dtype=float)
    n = sample.size
    ref = np.interp(sample, grid, cdf_values)
    at_or_below = (sample[None, :] <= sample[:, None]).sum(axis=1) / n
    strictly_below = (sample[None, :] < sample[:, None]).sum(axis=1) / n
    gaps = np.maximum(np.abs(at_or_below - ref), np.abs(strictly_below - ref))
    return float(np.max(gaps))


def box_kde(draws: np.ndarray, x: float, width: float) -> float:
    """Box-kernel density estimate at a point."""
    return float(np.mean(np.abs(draws - x) < width / 2.0) / width)
