"""
Tests for utility functions.
"""

import logging

import pytest
from utils import (
    round_sig, parse_grid, parse_int_grid, join_flags,
    format_number, FloatPrecisionFilter, setup_logging
)


class TestRoundSig:
    """Tests for significant-digit rounding."""

    def test_round_small_value(self):
        """Test rounding below one."""
        assert round_sig(0.123456789, 3) == 0.123

    def test_round_large_value(self):
        """Test rounding above one."""
        assert round_sig(12345.0, 2) == 12000.0

    def test_zero_and_non_finite(self):
        """Test values that are returned unchanged."""
        assert round_sig(0.0) == 0.0
        assert round_sig(float("inf")) == float("inf")


class TestParseGrid:
    """Tests for sweep-axis parsing."""

    def test_inclusive_range(self):
        """Test start:stop:steps includes both ends."""
        assert parse_grid("0:1:3") == [0.0, 0.5, 1.0]

    def test_single_step(self):
        """Test a one-point range."""
        assert parse_grid("0.25:9:1") == [0.25]

    def test_comma_list(self):
        """Test comma-separated values."""
        assert parse_grid("0.1, 0.5,2") == [0.1, 0.5, 2.0]

    def test_empty_range(self):
        """Test empty specifications."""
        assert parse_grid("0:1:0") == []
        assert parse_grid("") == []
        assert parse_grid(None) == []

    def test_malformed_range(self):
        """Test that malformed ranges raise."""
        with pytest.raises(ValueError):
            parse_grid("0:1")
        with pytest.raises(ValueError):
            parse_grid("a,b")


class TestParseIntGrid:
    """Tests for integer-axis parsing."""

    def test_inclusive_range(self):
        """Test start:stop is inclusive."""
        assert parse_int_grid("1:4") == [1, 2, 3, 4]

    def test_comma_list(self):
        """Test comma-separated integers."""
        assert parse_int_grid("1,3,5") == [1, 3, 5]

    def test_empty(self):
        """Test empty ranges."""
        assert parse_int_grid("") == []
        assert parse_int_grid("3:2") == []

    def test_malformed(self):
        """Test three-part integer ranges raise."""
        with pytest.raises(ValueError):
            parse_int_grid("1:2:3")


class TestJoinFlags:
    """Tests for flag joining."""

    def test_deduplicates_in_order(self):
        """Test duplicates are dropped and first-seen order kept."""
        assert join_flags(["b", "a", "b", "", "c"]) == "b|a|c"

    def test_empty(self):
        """Test no flags."""
        assert join_flags([]) == ""


class TestFormatNumber:
    """Tests for number formatting."""

    def test_significant_digits(self):
        """Test fixed significant digits with '.' separator."""
        assert format_number(1.0 / 3.0, 4) == "0.3333"
        assert format_number(2.0) == "2"

    def test_none(self):
        """Test None becomes empty."""
        assert format_number(None) == ""


class TestLogging:
    """Tests for logging setup."""

    def test_precision_filter_rounds_floats(self):
        """Test float arguments are rounded before formatting."""
        record = logging.LogRecord("x", logging.INFO, __file__, 1, "%s %s", (0.123456789123, "s"), None)
        assert FloatPrecisionFilter(digits=3).filter(record) is True
        assert record.args == (0.123, "s")

    def test_setup_logging_replaces_handlers(self, tmp_path):
        """Test repeated setup does not duplicate handlers."""
        log_file = tmp_path / "engine.log"
        setup_logging("DEBUG", str(log_file), log_to_console=True)
        logger = setup_logging("WARNING", str(log_file), log_to_console=True)
        assert logger.name == "xx_entanglement"
        assert logger.level == logging.WARNING
        assert len(logger.handlers) == 2
        for handler in logger.handlers:
            handler.close()
        logger.handlers.clear()
