"""
Symmetry and edge-case tests across the finite, bulk and ground-state paths.
"""

import math

import pytest

from chain import ChainSpec, critical_fields
from thermal import concurrence, entanglement_margin, pair_density
from ground_state import gs_concurrence
from bulk import bulk_concurrence, bulk_pair_density

SPECS = [
    ChainSpec(n=6, v=1.0, b=0.35),
    ChainSpec(n=8, v=1.5, b=-0.9),
    ChainSpec(n=7, v=1.0, b=0.2),
    ChainSpec(n=9, v=-1.0, b=0.6),
]


class TestFieldReversal:
    """Tests for b -> -b (spin flip)."""

    @pytest.mark.parametrize("spec", SPECS)
    def test_concurrence_even_in_field(self, spec):
        """Test C_L(b) = C_L(-b) and p_plus <-> p_minus."""
        flipped = spec.with_field(-spec.b)
        for L in range(1, spec.n):
            a = pair_density(spec, 0.3, L)
            b = pair_density(flipped, 0.3, L)
            assert concurrence(a) == pytest.approx(concurrence(b), abs=1e-10)
            assert a.p_plus == pytest.approx(b.p_minus, abs=1e-10)
            assert a.magnetization == pytest.approx(-b.magnetization, abs=1e-10)

    def test_bulk_even_in_field(self):
        """Test the bulk concurrence is even in b."""
        for L in (1, 2, 3):
            assert bulk_concurrence(L, 4.0, 0.4, 1.0) == pytest.approx(bulk_concurrence(L, 4.0, -0.4, 1.0), abs=1e-10)


class TestCouplingReversal:
    """Tests for v -> -v."""

    @pytest.mark.parametrize("n", [4, 6, 8])
    def test_even_rings_are_sign_blind(self, n):
        """Test C_L(v) = C_L(-v) on even rings."""
        for b in (0.0, 0.4, 1.3):
            for L in range(1, n):
                ferro = concurrence(pair_density(ChainSpec(n=n, v=1.0, b=b), 0.25, L))
                anti = concurrence(pair_density(ChainSpec(n=n, v=-1.0, b=b), 0.25, L))
                assert ferro == pytest.approx(anti, abs=1e-10)

    def test_bulk_is_sign_blind(self):
        """Test the bulk pair density depends on v only through |v| up to the sign of alpha."""
        for L in (1, 2, 3):
            ferro = bulk_pair_density(L, 3.0, 0.2, 1.0)
            anti = bulk_pair_density(L, 3.0, 0.2, -1.0)
            assert ferro.p_plus == pytest.approx(anti.p_plus, abs=1e-12)
            assert abs(ferro.alpha) == pytest.approx(abs(anti.alpha), abs=1e-12)

    def test_odd_rings_are_frustrated(self):
        """Test odd rings distinguish ferro from antiferro coupling."""
        table = critical_fields(ChainSpec(n=7, v=-1.0, b=0.0))
        assert gs_concurrence(7, 1, 1, odd_af=True) < gs_concurrence(7, 1, 1)
        assert table.field(1) < 1.0


class TestRingReflection:
    """Tests for L -> n - L."""

    @pytest.mark.parametrize("spec", SPECS)
    def test_reflection(self, spec):
        """Test C_L = C_{n-L}."""
        for L in range(1, spec.n):
            a = concurrence(pair_density(spec, 0.3, L))
            b = concurrence(pair_density(spec, 0.3, spec.n - L))
            assert a == pytest.approx(b, abs=1e-10)


class TestExtremes:
    """Tests for limiting parameters."""

    def test_two_site_ring_closed_form(self):
        """Test n = 2 at b = 0: C = max(0, sinh(beta v) - 1) / (1 + cosh(beta v))."""
        for T in (0.2, 0.8, 1.2):
            x = 1.0 / T
            expected = max(0.0, math.sinh(x) - 1.0) / (1.0 + math.cosh(x))
            assert concurrence(pair_density(ChainSpec(n=2, v=1.0, b=0.0), T, 1)) == pytest.approx(expected, abs=1e-10)

    def test_strong_field_margin_sign(self):
        """Test the margin stays well defined far above saturation."""
        margin, _ = entanglement_margin(ChainSpec(n=6, v=1.0, b=40.0), 0.2, 1)
        assert math.isfinite(margin)
        assert margin > 0

    def test_weak_coupling_rescales(self):
        """Test C depends on (b, T) only through b/|v| and T/|v|."""
        small = concurrence(pair_density(ChainSpec(n=6, v=0.01, b=0.004), 0.002, 1))
        unit = concurrence(pair_density(ChainSpec(n=6, v=1.0, b=0.4), 0.2, 1))
        assert small == pytest.approx(unit, abs=1e-10)
