"""
Parameter sweeps and table output.

A SweepRequest names an evaluation path and the (b, T, L) grid. The runner
evaluates independent (b, T) points concurrently and assembles rows in
lexicographic (b, T, L) order, so output bytes do not depend on scheduling.
"""

import math
from dataclasses import dataclass, field
from itertools import product
from typing import Any, Dict, List, Literal, Optional, Sequence

import numpy as np
import pandas as pd
from joblib import Parallel, delayed
from pydantic import BaseModel, ValidationError, field_validator, model_validator

from config import (
    config, CRITICAL_FIELD_COLUMNS, LIMIT_TEMP_COLUMNS, RANGE_COLUMN,
    STAGGERING_COLUMNS, SWEEP_COLUMNS,
)
from chain import ChainError, ChainSpec, critical_fields
from ground_state import entanglement_range, gs_pair_density_for
from thermal import PairDensity, concurrence, entanglement_of_formation, pair_density
from bulk import bulk_pair_density, high_field_concurrence, high_field_pair_density
from limit_temp import (
    METHOD_PLATEAU, LimitTemperatureResult, limit_temperature, plateau_limit_temperature,
    staggering_table,
)
from oracle import (
    OracleSizeError, build_blocks, ground_state, max_concurrence_deviation,
    reduced_pair_density, thermal_state, wootters_concurrence, x_state_to_pair_density,
)
from utils import format_number, join_flags, setup_logging

logger = setup_logging(config.LOG_LEVEL, config.LOG_FILE or None, config.LOG_TO_CONSOLE)

ORACLE_TOLERANCE = 1e-8


class SweepRequestError(ChainError, ValueError):
    """Raised when a sweep request fails validation."""
    pass


class SweepRequest(BaseModel):
    """Grid and evaluation path of one concurrence sweep."""

    mode: Literal["finite", "bulk", "asymptotic", "oracle"]
    n: Optional[int] = None
    v: float = 1.0
    b: List[float]
    T: List[float]
    L: List[int]
    out: Optional[str] = None
    format: Literal["csv", "json"] = "csv"
    units: Literal["abs", "v"] = "abs"

    @field_validator("v")
    @classmethod
    def check_coupling(cls, value: float) -> float:
        if value == 0 or not math.isfinite(value):
            raise ValueError("v must be finite and non-zero")
        return value

    @field_validator("b", "T", "L")
    @classmethod
    def check_non_empty(cls, value: list) -> list:
        if not value:
            raise ValueError("range must not be empty")
        return value

    @model_validator(mode="after")
    def check_consistency(self) -> "SweepRequest":
        if self.mode == "bulk":
            if self.n is not None:
                raise ValueError("bulk mode takes no chain size")
        else:
            if self.n is None:
                raise ValueError(f"{self.mode} mode needs n")
            if self.n < 2:
                raise ValueError(f"n must be at least 2, got {self.n}")
            if any(L > self.n - 1 for L in self.L):
                raise ValueError(f"separations must be at most n-1 = {self.n - 1}")
        if self.mode == "oracle" and self.n > config.ED_MAX_SITES:
            raise ValueError(f"oracle mode needs n <= {config.ED_MAX_SITES}, got {self.n}")

        if any(L < 1 for L in self.L):
            raise ValueError("separations must be at least 1")
        if any(not math.isfinite(b) for b in self.b):
            raise ValueError("fields must be finite")
        if any(not (T >= 0) or not math.isfinite(T) for T in self.T):
            raise ValueError("temperatures must be finite and non-negative")
        if self.mode == "asymptotic" and any(T == 0 for T in self.T):
            raise ValueError("asymptotic mode needs T > 0")
        return self

    @classmethod
    def build(cls, **fields: Any) -> "SweepRequest":
        """Validate fields, raising SweepRequestError on failure."""
        try:
            return cls(**fields)
        except ValidationError as e:
            raise SweepRequestError(str(e)) from e

    def field_values(self) -> List[float]:
        """Sorted distinct fields in absolute units."""
        scale = abs(self.v) if self.units == "v" else 1.0
        return sorted({b * scale for b in self.b})

    def temperature_values(self) -> List[float]:
        """Sorted distinct temperatures in absolute units."""
        scale = abs(self.v) if self.units == "v" else 1.0
        return sorted({T * scale for T in self.T})

    def separations(self) -> List[int]:
        return sorted(set(self.L))


@dataclass
class SweepResult:
    """Rows of a finished sweep, in output order."""

    request: SweepRequest
    rows: List[Dict[str, Any]] = field(default_factory=list)

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame(self.rows, columns=SWEEP_COLUMNS)


def _row(req: SweepRequest, b: float, T: float, L: int, pd_: PairDensity, C: float) -> Dict[str, Any]:
    return {
        "mode": req.mode,
        "n": req.n,
        "v": req.v,
        "b": b,
        "T": T,
        "L": L,
        "C": C,
        "E": entanglement_of_formation(C),
        "p_plus": pd_.p_plus,
        "p_mid": pd_.p,
        "p_minus": pd_.p_minus,
        "alpha": pd_.alpha,
        "flags": join_flags(pd_.flags),
    }


def evaluate_point(req: SweepRequest, b: float, T: float) -> List[Dict[str, Any]]:
    """
    All rows of one (b, T) grid point, one per separation.

    Args:
        req: Validated request
        b: Field (absolute units)
        T: Temperature (absolute units)

    Returns:
        Rows ordered by L
    """
    rows = []
    Ls = req.separations()

    if req.mode == "finite":
        spec = ChainSpec(n=req.n, v=req.v, b=b)
        for L in Ls:
            pd_ = gs_pair_density_for(spec, L) if T == 0 else pair_density(spec, T, L)
            rows.append(_row(req, b, T, L, pd_, concurrence(pd_)))

    elif req.mode == "bulk":
        beta = None if T == 0 else 1.0 / T
        for L in Ls:
            pd_ = bulk_pair_density(L, beta, b, req.v)
            rows.append(_row(req, b, T, L, pd_, concurrence(pd_)))

    elif req.mode == "asymptotic":
        spec = ChainSpec(n=req.n, v=req.v, b=b)
        for L in Ls:
            pd_ = high_field_pair_density(spec, 1.0 / T, L)
            rows.append(_row(req, b, T, L, pd_, high_field_concurrence(spec, 1.0 / T, L)))

    else:
        spec = ChainSpec(n=req.n, v=req.v, b=b)
        blocks = build_blocks(spec)
        state = ground_state(blocks) if T == 0 else thermal_state(blocks, T)
        for L in Ls:
            rho = reduced_pair_density(state, 0, L)
            rows.append(_row(req, b, T, L, x_state_to_pair_density(rho), wootters_concurrence(rho)))

    return rows


class SweepRunner:
    """
    Executes sweep requests over a joblib worker pool.
    """

    def __init__(self, workers: Optional[int] = None):
        """
        Initialize runner.

        Args:
            workers: joblib n_jobs (defaults to SWEEP_WORKERS)
        """
        self.workers = workers or config.SWEEP_WORKERS

    def _parallel(self):
        return Parallel(n_jobs=self.workers, prefer="threads")

    def run(self, req: SweepRequest) -> SweepResult:
        """
        Evaluate every grid point of a request.

        Args:
            req: Validated request

        Returns:
            SweepResult with rows in (b, T, L) order
        """
        points = list(product(req.field_values(), req.temperature_values()))
        logger.info(
            "Starting %s sweep: %d points x %d separations (workers=%d)",
            req.mode, len(points), len(req.L), self.workers,
        )

        chunks = self._parallel()(delayed(evaluate_point)(req, b, T) for b, T in points)
        result = SweepResult(request=req, rows=[row for chunk in chunks for row in chunk])

        flagged = sum(1 for row in result.rows if row["flags"])
        if flagged:
            logger.warning("%d of %d rows carry warning flags", flagged, len(result.rows))
        logger.info("Sweep finished: %d rows", len(result.rows))
        return result

    def limit_temperatures(
        self,
        Ls: Sequence[int],
        bs: Sequence[float],
        v: float,
        n: Optional[int] = None
    ) -> pd.DataFrame:
        """
        Limit temperature and entanglement intervals for every (b, L).

        Args:
            Ls: Separations
            bs: Fields
            v: Coupling
            n: Chain size, or None for the infinite chain

        Returns:
            DataFrame with LIMIT_TEMP_COLUMNS
        """
        pairs = list(product(sorted(set(bs)), sorted(set(Ls))))
        results = self._parallel()(delayed(limit_temperature)(L, b, v, n) for b, L in pairs)
        rows = [
            _limit_row(n, v, b, L, result)
            for (b, L), result in zip(pairs, results)
        ]
        return pd.DataFrame(rows, columns=LIMIT_TEMP_COLUMNS)

    def plateau_temperatures(self, Ls: Sequence[int], v: float, n: int) -> pd.DataFrame:
        """Plateau (b -> infinity) limit temperatures of a finite ring."""
        odd_af = v < 0 and n % 2 == 1
        Ls = sorted(set(Ls))
        values = self._parallel()(
            delayed(plateau_limit_temperature)(n, v, L, odd_af) for L in Ls
        )
        rows = [
            {
                "n": n, "v": v, "b": math.inf, "L": L, "T_limit": T,
                "T_on_list": "", "method": METHOD_PLATEAU, "flags": "",
            }
            for L, T in zip(Ls, values)
        ]
        return pd.DataFrame(rows, columns=LIMIT_TEMP_COLUMNS)


def _format_intervals(result: LimitTemperatureResult) -> str:
    digits = config.OUTPUT_SIG_DIGITS
    return ";".join(
        f"{format_number(lo, digits)}:{format_number(hi, digits)}" for lo, hi in result.thresholds
    )


def _limit_row(n: Optional[int], v: float, b: float, L: int, result: LimitTemperatureResult) -> Dict[str, Any]:
    return {
        "n": n,
        "v": v,
        "b": b,
        "L": L,
        "T_limit": result.upper,
        "T_on_list": _format_intervals(result),
        "method": result.method,
        "flags": join_flags(result.flags),
    }


def critical_field_frame(n: int, v: float, with_range: bool = False) -> pd.DataFrame:
    """
    Transition fields b_N, optionally with the range of sector N below b_N.

    Args:
        n: Chain size
        v: Coupling
        with_range: Add the entanglement range column

    Returns:
        DataFrame with one row per N = 1..n
    """
    spec = ChainSpec(n=n, v=v, b=0.0)
    table = critical_fields(spec)
    frame = pd.DataFrame({
        "N": np.arange(1, n + 1),
        "b_N": np.asarray(table.fields),
    }, columns=CRITICAL_FIELD_COLUMNS)
    if with_range:
        frame[RANGE_COLUMN] = [entanglement_range(n, N, spec.odd_af) for N in range(1, n + 1)]
    return frame


def staggering_frame(ns: Sequence[int], v: float, L_rule: str = "half") -> pd.DataFrame:
    """Plateau limit temperatures of distant pairs next to their closed form."""
    rows = staggering_table(ns, v, L_rule)
    return pd.DataFrame(
        [
            {"n": r.n, "v": r.v, "L": r.L, "T_plateau": r.T_plateau, "T_closed_form": r.T_closed_form}
            for r in rows
        ],
        columns=STAGGERING_COLUMNS,
    )


def render_table(frame: pd.DataFrame, fmt: str = "csv") -> str:
    """
    Serialize a table with fixed formatting.

    CSV uses OUTPUT_SIG_DIGITS significant digits and '\\n' line endings;
    JSON is an array of records.
    """
    if fmt == "csv":
        return frame.to_csv(
            index=False,
            lineterminator="\n",
            float_format=f"%.{config.OUTPUT_SIG_DIGITS}g",
        )
    if fmt == "json":
        return frame.to_json(orient="records", double_precision=15) + "\n"
    raise SweepRequestError(f"Unknown output format '{fmt}'")


def write_table(frame: pd.DataFrame, out: Optional[str], fmt: str = "csv") -> str:
    """
    Render a table and write it to `out` (nothing is written when out is None).

    Returns:
        The rendered text
    """
    text = render_table(frame, fmt)
    if out:
        with open(out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        logger.info("Wrote %d rows to %s", len(frame), out)
    return text


@dataclass(frozen=True)
class OracleReport:
    """Outcome of a random-grid comparison against exact diagonalization."""

    max_abs_diff: float
    points: int
    n: int
    seed: int
    tolerance: float = ORACLE_TOLERANCE

    @property
    def passed(self) -> bool:
        return self.max_abs_diff <= self.tolerance

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return (
            f"max_abs_diff={self.max_abs_diff:.3e} points={self.points} "
            f"n={self.n} seed={self.seed} status={status}"
        )


def _core_concurrence(spec: ChainSpec, T: float, L: int) -> float:
    return concurrence(pair_density(spec, T, L))


def oracle_check(n: int, seed: int = 0, points: int = 50, workers: Optional[int] = None) -> OracleReport:
    """
    Compare exact concurrences with exact diagonalization on random points.

    Fields are drawn from [-2, 2] |v|, temperatures log-uniformly from
    [0.05, 5] |v| and the coupling sign at random, all from the seeded
    generator.

    Args:
        n: Chain size (<= ED_MAX_SITES)
        seed: Random seed
        points: Number of (v, b, T) samples
        workers: joblib n_jobs

    Returns:
        OracleReport
    """
    if n < 2 or n > config.ED_MAX_SITES:
        raise OracleSizeError(f"Oracle check needs 2 <= n <= {config.ED_MAX_SITES}, got {n}")
    if points < 1:
        raise SweepRequestError(f"points must be positive, got {points}")

    rng = np.random.default_rng(seed)
    vs = rng.choice([-1.0, 1.0], size=points)
    bs = rng.uniform(-2.0, 2.0, size=points)
    Ts = np.exp(rng.uniform(math.log(0.05), math.log(5.0), size=points))

    runner = SweepRunner(workers)
    deviations = runner._parallel()(
        delayed(max_concurrence_deviation)(ChainSpec(n=n, v=float(v), b=float(b)), float(T), _core_concurrence)
        for v, b, T in zip(vs, bs, Ts)
    )
    return OracleReport(max_abs_diff=float(max(deviations)), points=points, n=n, seed=seed)
