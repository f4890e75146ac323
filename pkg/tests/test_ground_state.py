"""
Tests for closed-form ground-state contractions, concurrences and ranges.
"""

import math

import numpy as np
import pytest

from chain import ChainSpec, InvalidChainError, critical_fields
from config import FLAG_GROUND_STATE
from ground_state import (
    entanglement_range, gs_concurrence, gs_contraction, gs_contraction_table,
    gs_pair_density, gs_pair_density_for, range_table, range_threshold_field,
)
from thermal import concurrence, pair_density
from bulk import bulk_concurrence


class TestContractions:
    """Tests for g_L of filled Fermi seas."""

    def test_single_fermion_is_flat(self):
        """Test N = 1 gives g_L = 1/n for every L."""
        assert gs_contraction(40, 1, 7) == 1.0 / 40
        assert np.all(gs_contraction_table(40, 1, 39) == 1.0 / 40)

    def test_single_fermion_pair_density_is_exact(self):
        """Test N = 1 has p_plus = 0 exactly and C_L = 2/n to rounding."""
        for L in (1, 13, 27, 39):
            pd = gs_pair_density(40, 1, L)
            assert pd.p_plus == 0.0
            assert concurrence(pd) == pytest.approx(0.05, abs=1e-14)

    def test_antiferro_sea_alternates(self):
        """Test a sea centred on pi multiplies g_m by (-1)^m."""
        plain = gs_contraction_table(12, 5, 11)
        flipped = gs_contraction_table(12, 5, 11, antiferro=True)
        assert np.allclose(flipped, plain * (-1.0) ** np.arange(12), atol=0.0)

    def test_full_chain(self):
        """Test N = n gives g_0 = 1 and g_L = 0."""
        g = gs_contraction_table(12, 12, 11)
        assert g[0] == 1.0
        assert np.all(g[1:] == 0.0)

    def test_half_filling_nearest_neighbour(self):
        """Test g_1 = 1/(n sin(pi/n)) at half filling."""
        assert gs_contraction(40, 20, 1) == pytest.approx(1.0 / (40 * math.sin(math.pi / 40)))

    def test_table_matches_scalar(self):
        """Test table and scalar forms agree."""
        g = gs_contraction_table(17, 5, 16)
        for L in range(17):
            assert g[L] == pytest.approx(gs_contraction(17, 5, L), abs=1e-15)

    def test_bounds_and_reflection(self):
        """Test |g_L| <= g_0 and |g_{n-L}| = |g_L|."""
        n, N = 23, 8
        g = gs_contraction_table(n, N, n - 1)
        assert np.all(np.abs(g) <= g[0] + 1e-15)
        for L in range(1, n):
            assert abs(g[n - L]) == pytest.approx(abs(g[L]), abs=1e-14)

    def test_out_of_range(self):
        """Test invalid fermion numbers and separations."""
        with pytest.raises(InvalidChainError):
            gs_contraction(10, 11, 1)
        with pytest.raises(InvalidChainError):
            gs_contraction(10, 3, 10)


class TestConcurrence:
    """Tests for ground-state concurrences."""

    @pytest.mark.parametrize("L", [1, 5, 13, 20, 39])
    def test_w_state_plateau(self, L):
        """Test N = 1 gives C_L = 2/n for every L."""
        assert gs_concurrence(40, 1, L) == pytest.approx(0.05, abs=1e-12)

    @pytest.mark.parametrize("L", range(1, 41))
    def test_odd_af_single_fermion(self, L):
        """Test the degenerate N = 1 branch gives 2 cos(L pi/n)/n."""
        expected = abs(2.0 * math.cos(L * math.pi / 41) / 41)
        assert gs_concurrence(41, 1, L, odd_af=True) == pytest.approx(expected, abs=1e-12)

    def test_odd_af_most_distant_pair(self):
        """Test C_20 of the n = 41 degenerate branch is about pi/n^2."""
        assert gs_concurrence(41, 1, 20, odd_af=True) == pytest.approx(math.pi / 41 ** 2, rel=1e-3)

    def test_maximum_nearest_neighbour(self):
        """Test C_1 = 2 g_1 (1 + g_1) - 1/2 at half filling."""
        g1 = 1.0 / (100 * math.sin(math.pi / 100))
        C1 = gs_concurrence(100, 50, 1)
        assert C1 == pytest.approx(2 * g1 * (1 + g1) - 0.5, abs=1e-12)
        assert C1 == pytest.approx(0.339, abs=2e-3)

    def test_product_states(self):
        """Test fully polarized states are separable."""
        assert gs_concurrence(10, 0, 3) == 0.0
        assert gs_concurrence(10, 10, 3) == 0.0

    def test_odd_af_rejects_even_ring(self):
        """Test the degenerate branch needs odd n."""
        with pytest.raises(InvalidChainError):
            gs_concurrence(10, 3, 2, odd_af=True)

    @pytest.mark.parametrize("n,N", [(10, 3), (11, 4), (12, 6), (9, 2)])
    def test_ring_symmetry(self, n, N):
        """Test C_L = C_{n-L}."""
        for L in range(1, n):
            assert gs_concurrence(n, N, L) == pytest.approx(gs_concurrence(n, N, n - L), abs=1e-10)

    @pytest.mark.parametrize("n", [7, 11, 21])
    def test_degenerate_branch_is_weaker(self, n):
        """Test C_L of the odd antiferromagnetic mixture never exceeds the regular value."""
        for N in range(1, n):
            for L in range(1, n // 2 + 1):
                assert gs_concurrence(n, N, L, odd_af=True) <= gs_concurrence(n, N, L) + 1e-12

    @pytest.mark.parametrize("N,L,exact", [(2, 1, 0.092248), (3, 1, 0.13108)])
    def test_initial_decay_law(self, N, L, exact):
        """Test C_L ~ (2N/n)[1 - pi L sqrt((N^2-1)/3)/n] for small N L."""
        n = 40
        C = gs_concurrence(n, N, L)
        assert C == pytest.approx(exact, abs=1e-4)
        trend = (2.0 * N / n) * (1.0 - math.pi * L * math.sqrt((N * N - 1) / 3.0) / n)
        assert C == pytest.approx(trend, rel=0.1)

    @pytest.mark.parametrize("L", [1, 2, 3])
    def test_large_n_matches_bulk_zero_temperature(self, L):
        """Test the n -> infinity limit coincides with the bulk T = 0 path."""
        n, N = 4000, 1000
        b = math.cos(math.pi * N / n)
        assert gs_concurrence(n, N, L) == pytest.approx(bulk_concurrence(L, None, b, 1.0), abs=1e-6)

    def test_pair_density_for_chain(self):
        """Test the ground sector is read off the field."""
        table = critical_fields(ChainSpec(n=40, v=1.0, b=0.0))
        spec = ChainSpec(n=40, v=1.0, b=0.5 * (table.field(1) + table.field(2)))
        assert concurrence(gs_pair_density_for(spec, 7)) == pytest.approx(0.05, abs=1e-12)

    @pytest.mark.parametrize("n,v,N", [(8, -1.0, 4), (8, 1.0, 4), (9, -1.0, 4), (6, -1.0, 2)])
    def test_alpha_sign_matches_thermal(self, n, v, N):
        """Test the coherence sign agrees with the cold thermal state for either coupling sign."""
        table = critical_fields(ChainSpec(n=n, v=v, b=0.0))
        spec = ChainSpec(n=n, v=v, b=0.5 * (table.field(N) + table.field(N + 1)))
        for L in range(1, n):
            cold = pair_density(spec, 1e-3 * abs(v), L)
            ground = gs_pair_density_for(spec, L)
            assert ground.alpha == pytest.approx(cold.alpha, abs=1e-6)

    def test_negative_coupling_nearest_neighbour(self):
        """Test n = 8, v = -1 at b = 0 has alpha_1 = -g_1 of the half-filled sea."""
        pd = gs_pair_density_for(ChainSpec(n=8, v=-1.0, b=0.0), 1)
        assert pd.alpha == pytest.approx(-1.0 / (8 * math.sin(math.pi / 8)), abs=1e-12)

    def test_pair_density_flags_and_normalization(self):
        """Test the ground-state pair density is normalized and flagged."""
        pd = gs_pair_density(20, 6, 2)
        assert pd.p_plus + 2 * pd.p + pd.p_minus == pytest.approx(1.0, abs=1e-12)
        assert pd.magnetization == pytest.approx(6 / 20 - 0.5)
        assert FLAG_GROUND_STATE in pd.flags


class TestRange:
    """Tests for the entanglement range L_m."""

    def test_single_fermion_full_range(self):
        """Test N = 1 is entangled at every separation."""
        assert entanglement_range(40, 1) == 20

    def test_dense_sector(self):
        """Test n = 40, N = 10 has range 2."""
        assert gs_concurrence(40, 10, 2) > 0
        assert gs_concurrence(40, 10, 3) == 0.0
        assert entanglement_range(40, 10) == 2

    def test_two_fermions(self):
        """Test n = 40, N = 2 is near (n + 1.79)/3.57."""
        assert entanglement_range(40, 2) in (10, 11, 12)

    def test_five_site_second_neighbours(self):
        """Test n = 5 second neighbours are entangled in every partially filled sector."""
        for N in range(1, 5):
            assert gs_concurrence(5, N, 2) > 0
        assert gs_concurrence(5, 2, 2) == pytest.approx(0.02161, abs=1e-4)

    def test_polarized_sectors(self):
        """Test product states have zero range."""
        assert entanglement_range(10, 0) == 0
        assert entanglement_range(10, 10) == 0

    def test_range_table_windows(self):
        """Test the staircase covers the field axis in order."""
        windows = range_table(12, 1.0)
        assert len(windows) == 13
        assert windows[0].b_high == math.inf
        assert windows[-1].b_low == -math.inf
        for upper, lower in zip(windows, windows[1:]):
            assert upper.b_low == lower.b_high

    def test_threshold_field(self):
        """Test the L = 2 threshold of n = 20 sits at the onset of N = 7."""
        b7 = critical_fields(ChainSpec(n=20, v=1.0, b=0.0)).field(7)
        assert b7 == pytest.approx(0.524115, abs=1e-5)
        assert range_threshold_field(20, 1.0, 2) == pytest.approx(b7)

    def test_threshold_unreachable(self):
        """Test separations beyond n/2 never qualify."""
        assert range_threshold_field(10, 1.0, 6) is None
