"""
Limit temperatures and reentrant entanglement windows.

Entanglement of a pair is decided by the sign of |alpha| - sqrt(p_plus p_minus).
The solvers scan that sign on a logarithmic temperature grid and refine every
sign change with Brent's method, so non-monotone (reentrant) behavior is
resolved into separate (T_on, T_off) intervals.
"""

from dataclasses import dataclass, field
from typing import Callable, List, Optional, Sequence, Set, Tuple

import numpy as np
from scipy.optimize import brentq

from config import config, FLAG_ASYMPTOTIC_MARGIN, FLAG_GRID_RESOLUTION, FLAG_GROUND_STATE
from chain import ChainSpec, InvalidChainError, LevelCrossingError
from ground_state import gs_pair_density_for
from thermal import UNDERFLOW_EXPONENT, entanglement_margin
from bulk import (
    bulk_high_field_margin, bulk_pair_density, distant_pair_T, high_field_margin,
)
from utils import setup_logging

logger = setup_logging(config.LOG_LEVEL, config.LOG_FILE or None, config.LOG_TO_CONSOLE)

METHOD_EXACT = "exact-finite-n"
METHOD_BULK = "bulk"
METHOD_PLATEAU = "asymptotic-plateau"

MIN_SCAN_POINTS = 100

Interval = Tuple[float, float]


@dataclass
class LimitTemperatureResult:
    """Largest entangled temperature plus every entanglement interval below it."""

    upper: float
    thresholds: List[Interval]
    method: str
    flags: List[str] = field(default_factory=list)

    @property
    def reentrant(self) -> bool:
        """True when entanglement switches on above T = 0."""
        return bool(self.thresholds) and self.thresholds[0][0] > 0.0


@dataclass(frozen=True)
class StaggeringRow:
    """Plateau limit temperature of the most distant pair for one chain size."""

    n: int
    v: float
    L: int
    T_plateau: float
    T_closed_form: Optional[float]


class MarginFunction:
    """Callable T -> entanglement margin that records the flags it raised."""

    def __init__(self, evaluate: Callable[[float], Tuple[float, Sequence[str]]]):
        self._evaluate = evaluate
        self.flags: Set[str] = set()

    def __call__(self, T: float) -> float:
        value, flags = self._evaluate(T)
        self.flags.update(flags)
        return value


def temperature_grid(v: float, points: Optional[int] = None) -> np.ndarray:
    """Logarithmic grid over [LIMIT_T_MIN, LIMIT_T_MAX] in units of |v|."""
    points = points or config.LIMIT_GRID_POINTS
    return abs(v) * np.geomspace(config.LIMIT_T_MIN, config.LIMIT_T_MAX, points)


def finite_margin(spec: ChainSpec, L: int) -> MarginFunction:
    """
    Exact finite-n margin as a function of T.

    At or below the grid floor LIMIT_T_MIN |v| the ground-state margin is
    used, unless the field sits on a level crossing.
    """
    if L < 1 or L > spec.n - 1:
        raise InvalidChainError(f"Separation must be in 1..{spec.n - 1}, got {L}")
    floor = config.LIMIT_T_MIN * abs(spec.v) * (1.0 + 1e-12)

    def evaluate(T: float) -> Tuple[float, Sequence[str]]:
        if T <= floor:
            try:
                return gs_pair_density_for(spec, L).margin(), (FLAG_GROUND_STATE,)
            except LevelCrossingError:
                logger.debug("Grid floor on a level crossing at b=%s; using the thermal margin", spec.b)
        return entanglement_margin(spec, T, L, high_field_margin=high_field_margin)

    return MarginFunction(evaluate)


def bulk_margin(L: int, b: float, v: float) -> MarginFunction:
    """Infinite-chain margin as a function of T."""
    if L < 1:
        raise InvalidChainError(f"Separation must be at least 1, got {L}")

    def evaluate(T: float) -> Tuple[float, Sequence[str]]:
        beta = 1.0 / T
        if beta * (abs(b) - abs(v)) > UNDERFLOW_EXPONENT:
            return bulk_high_field_margin(L, beta * v), (FLAG_ASYMPTOTIC_MARGIN,)
        return bulk_pair_density(L, beta, b, v).margin(), ()

    return MarginFunction(evaluate)


def plateau_margin(n: int, v: float, L: int) -> MarginFunction:
    """Field-independent high-field margin as a function of T."""
    return MarginFunction(lambda T: (high_field_margin(n, v, 1.0 / T, L), ()))


def scan_intervals(
    margin: Callable[[float], float],
    T_grid: Sequence[float],
    tol: float
) -> Tuple[List[Interval], List[str]]:
    """
    Entanglement intervals from the sign of margin(T) on a grid.

    Sign changes between neighbours are refined by brentq. An interval open
    at the lowest grid point starts at T = 0; one open at the highest grid
    point ends at the last grid temperature.

    Args:
        margin: Sign function of T
        T_grid: Strictly increasing temperatures
        tol: Absolute temperature tolerance

    Returns:
        Tuple of (ordered disjoint intervals, flags)
    """
    T = np.asarray(T_grid, dtype=float)
    if T.ndim != 1 or len(T) < 2 or np.any(np.diff(T) <= 0) or T[0] <= 0:
        raise InvalidChainError("Temperature grid must be positive and strictly increasing")

    values = np.array([margin(t) for t in T])
    entangled = values > 0
    flags: List[str] = []

    def refine(i: int) -> float:
        return brentq(margin, T[i], T[i + 1], xtol=tol)

    intervals: List[Interval] = []
    start: Optional[float] = 0.0 if entangled[0] else None
    for i in range(len(T) - 1):
        if entangled[i] == entangled[i + 1]:
            continue
        root = refine(i)
        if entangled[i + 1]:
            start = root
        else:
            intervals.append((start, root))
            start = None
    if start is not None:
        intervals.append((start, float(T[-1])))

    # an interval seen at a single grid point may hide neighbours
    isolated = entangled[1:-1] & ~entangled[:-2] & ~entangled[2:]
    if np.any(isolated):
        logger.warning("Entanglement interval resolved by a single grid point; grid may be too coarse")
        flags.append(FLAG_GRID_RESOLUTION)

    return intervals, flags


def _solve(margin: MarginFunction, v: float, method: str, T_grid=None) -> LimitTemperatureResult:
    grid = temperature_grid(v) if T_grid is None else T_grid
    intervals, flags = scan_intervals(margin, grid, config.LIMIT_T_TOL * abs(v))
    upper = intervals[-1][1] if intervals else 0.0
    return LimitTemperatureResult(
        upper=float(upper),
        thresholds=[(float(a), float(b)) for a, b in intervals],
        method=method,
        flags=sorted(margin.flags) + flags,
    )


def limit_temperature(
    L: int,
    b: float,
    v: float,
    n: Optional[int] = None
) -> LimitTemperatureResult:
    """
    Largest temperature at which the pair at separation L is entangled.

    Examples:
        limit_temperature(1, 0.0, 1.0, n=2).upper -> ~1.1346
        limit_temperature(1, 10.0, 1.0).upper -> ~0.486 (bulk)

    Args:
        L: Separation
        b: Field
        v: Coupling
        n: Chain size, or None for the infinite chain

    Returns:
        LimitTemperatureResult (upper = 0 when never entangled on the grid)
    """
    if n is None:
        result = _solve(bulk_margin(L, b, v), v, METHOD_BULK)
    else:
        result = _solve(finite_margin(ChainSpec(n=n, v=v, b=b), L), v, METHOD_EXACT)

    logger.debug("T_L(b): L=%d, b=%s, n=%s -> %s", L, b, n, result.upper)
    return result


def plateau_limit_temperature(n: int, v: float, L: int, odd_af: bool = False) -> float:
    """
    Limit temperature at b -> infinity, where entanglement no longer depends on b.

    Args:
        n: Chain size
        v: Coupling (its sign matters only through odd_af)
        L: Separation 1..[n/2]
        odd_af: Odd antiferromagnetic ring

    Returns:
        Plateau T_L
    """
    if odd_af and n % 2 == 0:
        raise InvalidChainError(f"The odd antiferromagnetic branch needs odd n, got n={n}")
    if L < 1 or L > n // 2:
        raise InvalidChainError(f"Separation must be in 1..{n // 2}, got {L}")

    v_eff = -abs(v) if odd_af else abs(v)
    return _solve(plateau_margin(n, v_eff, L), v, METHOD_PLATEAU).upper


def reentrance_scan(
    spec: ChainSpec,
    L: int,
    T_grid: Optional[Sequence[float]] = None
) -> LimitTemperatureResult:
    """
    All entanglement intervals of the pair at separation L on a temperature grid.

    Args:
        spec: Chain instance (field included)
        L: Separation
        T_grid: Strictly increasing grid with at least 100 points
            (default: 200 log-spaced points over the solver range)

    Returns:
        LimitTemperatureResult whose thresholds list every (T_on, T_off)
    """
    if T_grid is None:
        T_grid = temperature_grid(spec.v, 2 * MIN_SCAN_POINTS)
    if len(T_grid) < MIN_SCAN_POINTS:
        raise InvalidChainError(
            f"Reentrance scan needs at least {MIN_SCAN_POINTS} temperatures, got {len(T_grid)}"
        )
    return _solve(finite_margin(spec, L), spec.v, METHOD_EXACT, T_grid=T_grid)


def staggering_table(ns: Sequence[int], v: float, L_rule: str = "half") -> List[StaggeringRow]:
    """
    Plateau limit temperatures of the most distant pairs across chain sizes.

    Args:
        ns: Chain sizes
        v: Coupling (v < 0 exposes the odd-even staggering)
        L_rule: "half" for L = [n/2], "nearest" for L = 1

    Returns:
        One StaggeringRow per n
    """
    if L_rule not in ("half", "nearest"):
        raise InvalidChainError(f"L_rule must be 'half' or 'nearest', got '{L_rule}'")

    rows = []
    for n in ns:
        odd_af = v < 0 and n % 2 == 1
        L = n // 2 if L_rule == "half" else 1
        closed = distant_pair_T(n, v, odd_af) if (n >= 4 and L_rule == "half") else None
        rows.append(StaggeringRow(
            n=n,
            v=v,
            L=L,
            T_plateau=plateau_limit_temperature(n, v, L, odd_af),
            T_closed_form=closed,
        ))
    return rows
