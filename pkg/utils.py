"""
Utility functions for the XX-chain entanglement engine.
Includes logging setup, grid parsing for sweeps and flag/number formatting.
"""

import logging
import math
from typing import Any, Iterable, List, Optional

import numpy as np


def round_sig(value: float, digits: int = 6) -> float:
    """
    Round a float to a number of significant digits.

    Examples:
        round_sig(0.123456789, 3) -> 0.123
        round_sig(12345.0, 2) -> 12000.0

    Args:
        value: Number to round
        digits: Significant digits to keep

    Returns:
        Rounded value (non-finite values are returned unchanged)
    """
    if value == 0 or not math.isfinite(value):
        return value
    return round(value, digits - 1 - int(math.floor(math.log10(abs(value)))))


def parse_grid(text: str) -> List[float]:
    """
    Parse a sweep axis given as ``start:stop:steps`` or a comma list.

    ``start:stop:steps`` is inclusive of both ends (``steps`` points).

    Examples:
        parse_grid("0:1:3") -> [0.0, 0.5, 1.0]
        parse_grid("0.1,0.5") -> [0.1, 0.5]

    Args:
        text: Axis specification

    Returns:
        List of floats (empty if the range is empty)

    Raises:
        ValueError: If the text cannot be parsed
    """
    if text is None or not str(text).strip():
        return []

    text = str(text).strip()
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise ValueError(f"Range must be start:stop:steps, got '{text}'")
        start, stop = float(parts[0]), float(parts[1])
        steps = int(parts[2])
        if steps <= 0:
            return []
        if steps == 1:
            return [start]
        return [float(x) for x in np.linspace(start, stop, steps)]

    return [float(item) for item in text.split(",") if item.strip()]


def parse_int_grid(text: str) -> List[int]:
    """
    Parse an integer axis given as ``start:stop`` (inclusive) or a comma list.

    Args:
        text: Axis specification

    Returns:
        List of integers

    Raises:
        ValueError: If the text cannot be parsed
    """
    if text is None or not str(text).strip():
        return []

    text = str(text).strip()
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 2:
            raise ValueError(f"Integer range must be start:stop, got '{text}'")
        start, stop = int(parts[0]), int(parts[1])
        return list(range(start, stop + 1))

    return [int(item) for item in text.split(",") if item.strip()]


def join_flags(flags: Iterable[str], separator: str = "|") -> str:
    """
    Join warning flags into one column value, keeping first-seen order.

    Args:
        flags: Flag names (duplicates and empty entries are dropped)
        separator: Separator string

    Returns:
        Joined string ("" when there are no flags)
    """
    seen: List[str] = []
    for flag in flags:
        if flag and flag not in seen:
            seen.append(flag)
    return separator.join(seen)


def format_number(value: Any, digits: int = 15) -> str:
    """
    Format a number with a fixed count of significant digits.

    Args:
        value: Number (None becomes an empty string)
        digits: Significant digits

    Returns:
        Formatted string using '.' as the decimal separator
    """
    if value is None:
        return ""
    return f"{float(value):.{digits}g}"


class FloatPrecisionFilter(logging.Filter):
    """
    Logging filter that rounds float arguments of every record.
    """

    def __init__(self, digits: int = 6):
        super().__init__()
        self.digits = digits

    def filter(self, record: logging.LogRecord) -> bool:
        """
        Round float arguments before output.

        Args:
            record: Log record to filter

        Returns:
            True (always allow record through)
        """
        if record.args and isinstance(record.args, tuple):
            record.args = tuple(
                round_sig(arg, self.digits) if isinstance(arg, float) else arg
                for arg in record.args
            )

        return True


def setup_logging(
    log_level: str = "INFO",
    log_file: Optional[str] = None,
    log_to_console: bool = True
) -> logging.Logger:
    """
    Configure engine logging.

    Args:
        log_level: Logging level (DEBUG, INFO, WARNING, ERROR, CRITICAL)
        log_file: Optional log file path
        log_to_console: Whether to log to console

    Returns:
        Configured logger instance
    """
    logger = logging.getLogger("xx_entanglement")
    logger.setLevel(getattr(logging, log_level.upper()))

    # Remove existing handlers
    logger.handlers.clear()

    formatter = logging.Formatter(
        '%(asctime)s [%(levelname)s] %(name)s - %(message)s',
        datefmt='%Y-%m-%d %H:%M:%S'
    )

    precision_filter = FloatPrecisionFilter()

    if log_to_console:
        console_handler = logging.StreamHandler()
        console_handler.setFormatter(formatter)
        console_handler.addFilter(precision_filter)
        logger.addHandler(console_handler)

    if log_file:
        file_handler = logging.FileHandler(log_file)
        file_handler.setFormatter(formatter)
        file_handler.addFilter(precision_filter)
        logger.addHandler(file_handler)

    return logger
