"""
Tests for the chain model: momenta, spectrum and transition fields.
"""

import math

import numpy as np
import pytest

from chain import (
    BRANCH_ODD_AF, BRANCH_REGULAR, ChainSpec, InvalidChainError, LevelCrossingError,
    SectorKey, canonical, critical_fields, ground_energy, ground_sector,
    many_body_energies, momenta, momentum_set, sector_energies, single_fermion_energy,
)


class TestChainSpec:
    """Tests for chain instances."""

    @pytest.mark.parametrize("kwargs", [
        {"n": 1, "v": 1.0, "b": 0.0},
        {"n": 2.5, "v": 1.0, "b": 0.0},
        {"n": 4, "v": 0.0, "b": 0.0},
        {"n": 4, "v": 1.0, "b": math.inf},
        {"n": 4, "v": math.nan, "b": 0.0},
    ])
    def test_invalid_parameters(self, kwargs):
        """Test invalid sizes, couplings and fields are rejected."""
        with pytest.raises(InvalidChainError):
            ChainSpec(**kwargs)

    def test_invalid_chain_error_is_value_error(self):
        """Test callers can catch the generic ValueError."""
        with pytest.raises(ValueError):
            ChainSpec(n=0, v=1.0, b=0.0)

    def test_odd_af_flag(self):
        """Test the odd antiferromagnetic flag."""
        assert ChainSpec(n=5, v=-1.0, b=0.0).odd_af
        assert not ChainSpec(n=6, v=-1.0, b=0.0).odd_af
        assert not ChainSpec(n=5, v=1.0, b=0.0).odd_af

    def test_with_field(self):
        """Test changing only the field."""
        spec = ChainSpec(n=4, v=2.0, b=0.1).with_field(0.7)
        assert (spec.n, spec.v, spec.b) == (4, 2.0, 0.7)

    def test_canonical(self):
        """Test reduction to magnitudes."""
        c = canonical(ChainSpec(n=7, v=-2.0, b=-0.5))
        assert (c.abs_v, c.abs_b, c.field_flipped, c.coupling_flipped, c.odd_af) == (2.0, 0.5, True, True, True)
        assert not canonical(ChainSpec(n=6, v=1.0, b=0.2)).coupling_flipped

    def test_sector_keys(self):
        """Test sector keys reject unknown parities and projections."""
        with pytest.raises(InvalidChainError):
            SectorKey(0, 0)
        with pytest.raises(InvalidChainError):
            SectorKey(1, 2)


class TestMomenta:
    """Tests for parity-sector momentum sets."""

    def test_even_chain_sets(self):
        """Test integer and half-integer momenta for n = 4."""
        assert momentum_set(4, -1).tolist() == [-4, -2, 0, 2]
        assert momentum_set(4, 1).tolist() == [-3, -1, 1, 3]
        assert momenta(4, 1).tolist() == [-1.5, -0.5, 0.5, 1.5]

    @pytest.mark.parametrize("n", [2, 3, 5, 8, 41])
    @pytest.mark.parametrize("sigma", [1, -1])
    def test_set_size_and_parity(self, n, sigma):
        """Test every set holds n momenta of the right parity."""
        doubled = momentum_set(n, sigma)
        assert len(doubled) == n
        assert np.all(np.diff(doubled) == 2)
        assert np.all(doubled % 2 == (1 if sigma == 1 else 0))

    def test_invalid_arguments(self):
        """Test invalid size and parity label."""
        with pytest.raises(InvalidChainError):
            momentum_set(1, 1)
        with pytest.raises(InvalidChainError):
            momentum_set(4, 0)


class TestSpectrum:
    """Tests for single- and many-body energies."""

    def test_single_fermion_energy(self):
        """Test lambda_k = b - v cos(2 pi k / n)."""
        spec = ChainSpec(n=8, v=1.5, b=0.3)
        assert single_fermion_energy(spec, 0) == pytest.approx(0.3 - 1.5)
        assert single_fermion_energy(spec, 2) == pytest.approx(0.3)
        assert sector_energies(spec, -1)[4] == pytest.approx(single_fermion_energy(spec, 0))

    def test_many_body_count_and_trace(self):
        """Test 2^n levels with vanishing trace."""
        energies = many_body_energies(ChainSpec(n=6, v=1.0, b=0.7))
        assert len(energies) == 64
        assert energies.sum() == pytest.approx(0.0, abs=1e-10)

    def test_enumeration_limit(self):
        """Test enumeration refuses large rings."""
        with pytest.raises(InvalidChainError):
            many_body_energies(ChainSpec(n=17, v=1.0, b=0.0))

    @pytest.mark.parametrize("spec", [
        ChainSpec(n=6, v=1.0, b=0.2),
        ChainSpec(n=7, v=-1.0, b=-0.4),
        ChainSpec(n=5, v=1.3, b=1.9),
    ])
    def test_ground_energy_is_spectrum_minimum(self, spec):
        """Test the filled-level rule gives the lowest level."""
        N, _ = ground_sector(spec)
        assert ground_energy(spec, N) == pytest.approx(many_body_energies(spec)[0], abs=1e-12)

    def test_fully_polarized_energies(self):
        """Test N = 0 and N = n energies are -+ b n / 2."""
        spec = ChainSpec(n=6, v=1.0, b=0.5)
        assert ground_energy(spec, 0) == pytest.approx(-1.5)
        assert ground_energy(spec, 6) == pytest.approx(1.5)


class TestCriticalFields:
    """Tests for ground-state transition fields."""

    def test_first_field_equals_coupling(self):
        """Test b_1 = v for the regular branch."""
        table = critical_fields(ChainSpec(n=40, v=1.0, b=0.0))
        assert len(table) == 40
        assert table.field(1) == pytest.approx(1.0)
        assert table.branch == BRANCH_REGULAR

    def test_odd_af_first_field(self):
        """Test b_1 = cos(pi/n) |v| on the odd antiferromagnetic branch."""
        table = critical_fields(ChainSpec(n=41, v=-1.0, b=0.0))
        assert table.field(1) == pytest.approx(math.cos(math.pi / 41))
        assert table.branch == BRANCH_ODD_AF

    def test_strictly_decreasing_and_symmetric(self):
        """Test ordering and b_{n+1-N} = -b_N."""
        fields = np.asarray(critical_fields(ChainSpec(n=12, v=2.0, b=0.0)).fields)
        assert np.all(np.diff(fields) < 0)
        assert np.allclose(fields, -fields[::-1])

    def test_sentinels(self):
        """Test b_0 = +inf and b_{n+1} = -inf."""
        table = critical_fields(ChainSpec(n=4, v=1.0, b=0.0))
        assert table.field(0) == math.inf
        assert table.field(5) == -math.inf

    @pytest.mark.parametrize("n,v", [(6, 1.0), (7, 1.0), (7, -1.0), (8, -2.0), (9, -0.5)])
    def test_levels_cross_at_transition_fields(self, n, v):
        """Test E_{N-1}(b_N) = E_N(b_N) for every N."""
        table = critical_fields(ChainSpec(n=n, v=v, b=0.0))
        for N in range(1, n + 1):
            spec = ChainSpec(n=n, v=v, b=table.field(N))
            assert ground_energy(spec, N - 1) == pytest.approx(ground_energy(spec, N), abs=1e-12)


class TestGroundSector:
    """Tests for ground-sector classification."""

    def test_polarized_limits(self):
        """Test N = 0 far above and N = n far below."""
        assert ground_sector(ChainSpec(n=6, v=1.0, b=2.0)) == (0, False)
        assert ground_sector(ChainSpec(n=6, v=1.0, b=-2.0)) == (6, False)

    def test_mid_plateau(self):
        """Test the sector between b_2 and b_1."""
        table = critical_fields(ChainSpec(n=10, v=1.0, b=0.0))
        b = 0.5 * (table.field(1) + table.field(2))
        assert ground_sector(ChainSpec(n=10, v=1.0, b=b)) == (1, False)

    def test_odd_af_degenerate(self):
        """Test the two-fold degeneracy of odd antiferromagnetic rings."""
        table = critical_fields(ChainSpec(n=3, v=-1.0, b=0.0))
        b = 0.5 * (table.field(1) + table.field(2))
        assert ground_sector(ChainSpec(n=3, v=-1.0, b=b)) == (1, True)

    def test_level_crossing_raises(self):
        """Test a field on a transition is rejected."""
        with pytest.raises(LevelCrossingError):
            ground_sector(ChainSpec(n=6, v=1.0, b=1.0))
