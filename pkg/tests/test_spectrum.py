import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import bhpfluct as bf
from oracles import dense_nonzero_eigenvalues


class TestLaplacianEigenvalues:
    def test_l2_matches_dense_oracle(self):
        spectrum = bf.laplacian_eigenvalues(2)
        assert spectrum.eigenvalues == pytest.approx([4.0, 4.0, 8.0], abs=1e-12)
        oracle = dense_nonzero_eigenvalues(2)
        assert spectrum.eigenvalues == pytest.approx(oracle, abs=1e-10)

    def test_l2_trace_identity(self):
        spectrum = bf.laplacian_eigenvalues(2)
        assert spectrum.eigenvalues.sum() == pytest.approx(16.0, abs=1e-12)

    @pytest.mark.parametrize("L", range(2, 13))
    def test_closed_form_matches_dense_diagonalization(self, L):
        spectrum = bf.laplacian_eigenvalues(L)
        assert spectrum.eigenvalues.size == L * L - 1
        assert np.all(spectrum.eigenvalues > 0.0)
        np.testing.assert_allclose(
            spectrum.eigenvalues, dense_nonzero_eigenvalues(L), atol=1e-10, rtol=0.0
        )
        assert spectrum.eigenvalues.sum() == pytest.approx(4.0 * L * L, abs=1e-9)

    def test_l10_count_and_smallest_mode(self):
        spectrum = bf.laplacian_eigenvalues(10)
        assert spectrum.eigenvalues.size == 99
        smallest = 4.0 - 2.0 * math.cos(2.0 * math.pi / 10.0) - 2.0
        assert spectrum.eigenvalues[0] == pytest.approx(smallest, rel=1e-12)
        assert smallest == pytest.approx(0.38197, abs=5e-6)

    def test_l1_is_invalid(self):
        with pytest.raises(ValueError):
            bf.laplacian_eigenvalues(1)

    @pytest.mark.parametrize("L", [2, 3, 5, 8, 10])
    def test_momentum_symmetry_is_exact(self, L):
        p, q, lam = bf.mode_table(L)
        table = {(int(a), int(b)): v for a, b, v in zip(p, q, lam)}
        for (a, b), value in table.items():
            assert table[(b, a)] == value
            assert table[((L - a) % L, (L - b) % L)] == value
        counted = sorted(table.values())
        assert counted == pytest.approx(
            bf.laplacian_eigenvalues(L).eigenvalues, abs=0.0
        )

    def test_distinct_modes_partition_the_spectrum(self):
        spectrum = bf.laplacian_eigenvalues(10)
        values, mult = spectrum.distinct_modes()
        assert mult.sum() == 99
        assert np.all(np.diff(values) > 0.0)
        rebuilt = np.repeat(values, mult)
        np.testing.assert_array_equal(rebuilt, spectrum.eigenvalues)


class TestSpectrumValidation:
    def test_wrong_count_rejected(self):
        with pytest.raises(ValueError, match="eigenvalues"):
            bf.LatticeSpectrum(L=2, eigenvalues=np.array([4.0, 8.0]))

    def test_nonpositive_rejected(self):
        with pytest.raises(ValueError, match="positive"):
            bf.LatticeSpectrum(L=2, eigenvalues=np.array([-1.0, 4.0, 8.0]))

    def test_unsorted_rejected(self):
        with pytest.raises(ValueError, match="ascending"):
            bf.LatticeSpectrum(L=2, eigenvalues=np.array([8.0, 4.0, 4.0]))


class TestVariancePrefactor:
    def test_l2_closed_form(self):
        spectrum = bf.laplacian_eigenvalues(2)
        assert bf.variance_prefactor(spectrum) == pytest.approx(
            math.sqrt(9.0 / 2048.0), rel=1e-14
        )
        assert bf.variance_prefactor(spectrum) == pytest.approx(0.066291, abs=1e-6)

    @settings(max_examples=50, deadline=None)
    @given(
        scale=st.floats(min_value=1e-3, max_value=1e3),
        L=st.integers(min_value=2, max_value=8),
    )
    def test_homogeneity_under_eigenvalue_scaling(self, scale, L):
        base = bf.laplacian_eigenvalues(L)
        scaled = bf.LatticeSpectrum(L=L, eigenvalues=base.eigenvalues * scale)
        assert bf.variance_prefactor(scaled) == pytest.approx(
            bf.variance_prefactor(base) / scale, rel=1e-12
        )

    def test_decreases_with_lattice_size(self):
        values = [
            bf.variance_prefactor(bf.laplacian_eigenvalues(L)) for L in range(2, 17)
        ]
        assert all(v > 0.0 for v in values)
        assert all(a > b for a, b in zip(values, values[1:]))

    def test_summation_order_independence(self):
        spectrum = bf.laplacian_eigenvalues(10)
        result = bf.variance_prefactor(spectrum)
        inv_sq = 1.0 / spectrum.eigenvalues**2
        n = spectrum.N
        ascending = math.sqrt(math.fsum(sorted(inv_sq.tolist())) / (2.0 * n * n))
        descending = math.sqrt(
            math.fsum(sorted(inv_sq.tolist(), reverse=True)) / (2.0 * n * n)
        )
        assert result == pytest.approx(ascending, rel=1e-14)
        assert result == pytest.approx(descending, rel=1e-14)
