"""Eigenvalue spectrum of the L x L periodic square-lattice Laplacian.

The coupling matrix behind the BHP density is the Laplacian of the L x L
torus.  Its eigenvalues are indexed by integer momenta (p, q):

    lambda_(p,q) = 4 - 2 cos(2 pi p / L) - 2 cos(2 pi q / L)

The (0, 0) zero mode is excluded, leaving N - 1 = L^2 - 1 strictly positive
eigenvalues.  Only this positive spectrum makes the logarithms and
arctangents of the inversion integrand well defined for all real x; the
overall eigenvalue scale cancels in the standardized density because the
variance prefactor normalizes the variance to one.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "LatticeSpectrum",
    "laplacian_eigenvalues",
    "mode_table",
    "variance_prefactor",
]


@dataclass(frozen=True)
class LatticeSpectrum:
    """Positive eigenvalues of the periodic lattice Laplacian, zero mode excluded.

    ``eigenvalues`` holds the L^2 - 1 nonzero eigenvalues sorted ascending,
    duplicates retained (multiplicity enters the mode products).
    """

    L: int
    eigenvalues: np.ndarray

    def __post_init__(self) -> None:
        if self.L < 2:
            raise ValueError(f"lattice side must be >= 2, got L={self.L}")
        eig = np.asarray(self.eigenvalues, dtype=float)
        if eig.ndim != 1 or eig.size != self.L * self.L - 1:
            raise ValueError(
                f"expected {self.L * self.L - 1} eigenvalues for L={self.L}, "
                f"got {eig.size}"
            )
        if not np.all(eig > 0.0):
            raise ValueError("all eigenvalues must be strictly positive")
        if np.any(np.diff(eig) < 0.0):
            raise ValueError("eigenvalues must be sorted ascending")
        object.__setattr__(self, "eigenvalues", eig)

    @property
    def N(self) -> int:
        """Site count L^2."""
        return self.L * self.L

    def distinct_modes(self) -> tuple[np.ndarray, np.ndarray]:
        """Distinct eigenvalues and their multiplicities.

        Grouping is exact: eigenvalues related by the lattice symmetries
        (p, q) <-> (q, p) and (p, q) <-> (L-p, L-q) are computed to identical
        floating-point values.
        """
        values, counts = np.unique(self.eigenvalues, return_counts=True)
        return values, counts


def mode_table(L: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """(p, q, lambda) for every nonzero mode, sorted by eigenvalue then (p, q).

    The cosine argument is folded to min(p, L-p) so that symmetric momenta
    evaluate to bit-identical eigenvalues, and the two cosines are summed
    before scaling so that (p, q) and (q, p) agree exactly.
    """
    if L < 2:
        raise ValueError(
            f"lattice side must be >= 2, got L={L} (the L=1 lattice has no nonzero mode)"
        )
    idx = np.arange(L)
    cvals = np.cos(2.0 * np.pi * np.minimum(idx, L - idx) / L)
    p, q = np.meshgrid(idx, idx, indexing="ij")
    p = p.ravel()
    q = q.ravel()
    lam = 4.0 - 2.0 * (cvals[p] + cvals[q])
    keep = ~((p == 0) & (q == 0))
    p, q, lam = p[keep], q[keep], lam[keep]
    order = np.lexsort((q, p, lam))
    return p[order], q[order], lam[order]


def laplacian_eigenvalues(L: int) -> LatticeSpectrum:
    """Spectrum of the L x L periodic lattice Laplacian, zero mode excluded."""
    _, _, lam = mode_table(L)
    return LatticeSpectrum(L=L, eigenvalues=lam)


def variance_prefactor(spectrum: LatticeSpectrum) -> float:
    """sqrt((1 / 2N^2) sum_k 1/lambda_k^2), the scale that standardizes the density.

    The inverse-square sum is accumulated with compensated summation; for
    large L it mixes O(1) and O(1e-2) terms and plain left-to-right addition
    would lose a few digits.
    """
    n = spectrum.N
    inv_sq = 1.0 / np.square(spectrum.eigenvalues)
    return math.sqrt(math.fsum(inv_sq.tolist()) / (2.0 * n * n))
