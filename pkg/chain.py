"""
Cyclic XX chain in a transverse field.

Physical instance, parity-sector momentum sets, the single-fermion spectrum
after the Jordan-Wigner mapping, ground-state transition fields and the
ground-state sector for a given field.

Momenta are kept as doubled integers (2k) so half-integer values stay exact.
"""

import math
from dataclasses import dataclass, replace
from typing import Tuple

import numpy as np

from config import config


class ChainError(Exception):
    """Base exception for all chain computations."""
    pass


class InvalidChainError(ChainError, ValueError):
    """Raised when chain parameters or operation arguments are invalid."""
    pass


class LevelCrossingError(ChainError):
    """Raised when the field sits on a ground-state level crossing."""
    pass


# sigma = +1: even fermion number, half-integer k
# sigma = -1: odd fermion number, integer k
PARITIES = (1, -1)

BRANCH_REGULAR = "ferro-or-even"
BRANCH_ODD_AF = "odd-antiferro"

# Many-body enumeration is exponential in n
MAX_ENUMERATION_SITES = 16


@dataclass(frozen=True)
class ChainSpec:
    """
    A cyclic chain of n spins with XX coupling v in a transverse field b.

    H = b S^z - v sum_j (s^x_j s^x_{j+1} + s^y_j s^y_{j+1})
    """

    n: int
    v: float
    b: float

    def __post_init__(self):
        if isinstance(self.n, bool) or int(self.n) != self.n:
            raise InvalidChainError(f"Chain size must be an integer, got {self.n!r}")
        object.__setattr__(self, "n", int(self.n))
        if self.n < 2:
            raise InvalidChainError(f"Chain size must be at least 2, got {self.n}")
        if not math.isfinite(self.v) or self.v == 0:
            raise InvalidChainError(f"Coupling must be finite and non-zero, got {self.v}")
        if not math.isfinite(self.b):
            raise InvalidChainError(f"Field must be finite, got {self.b}")

    @property
    def odd_af(self) -> bool:
        """True for an antiferromagnetic (v < 0) ring with an odd number of sites."""
        return self.v < 0 and self.n % 2 == 1

    def with_field(self, b: float) -> "ChainSpec":
        """Return the same chain at another field."""
        return replace(self, b=b)


@dataclass(frozen=True)
class SectorKey:
    """Parity label sigma and projector power nu of one partition-function sector."""

    sigma: int
    nu: int

    def __post_init__(self):
        if self.sigma not in PARITIES:
            raise InvalidChainError(f"sigma must be +1 or -1, got {self.sigma}")
        if self.nu not in (0, 1):
            raise InvalidChainError(f"nu must be 0 or 1, got {self.nu}")


@dataclass(frozen=True)
class CriticalFieldTable:
    """Ground-state transition fields b_1 > b_2 > ... > b_n."""

    fields: Tuple[float, ...]
    branch: str

    def __len__(self) -> int:
        return len(self.fields)

    def field(self, N: int) -> float:
        """
        Transition field b_N (1-based), with b_0 = +inf and b_{n+1} = -inf.

        Args:
            N: Transition index 0..n+1

        Returns:
            Field value
        """
        if N <= 0:
            return math.inf
        if N > len(self.fields):
            return -math.inf
        return self.fields[N - 1]


@dataclass(frozen=True)
class CanonicalChain:
    """Chain reduced to (|v|, |b|) plus its symmetry flags."""

    n: int
    abs_v: float
    abs_b: float
    field_flipped: bool
    coupling_flipped: bool
    odd_af: bool


def canonical(spec: ChainSpec) -> CanonicalChain:
    """
    Reduce a chain to magnitudes of coupling and field.

    Concurrences depend only on |b| and |v|. A negative coupling flips the
    sign of alpha at odd separations; the odd antiferromagnetic flag also
    changes the ground-state formulas.
    """
    return CanonicalChain(
        n=spec.n,
        abs_v=abs(spec.v),
        abs_b=abs(spec.b),
        field_flipped=spec.b < 0,
        coupling_flipped=spec.v < 0,
        odd_af=spec.odd_af,
    )


def momentum_set(n: int, sigma: int) -> np.ndarray:
    """
    Momentum indices of one parity sector, as doubled integers 2k.

    k runs from -[n/2] + d/2 to [(n-1)/2] + d/2 in unit steps, where d = 1
    for sigma = +1 (half-integer k) and d = 0 for sigma = -1 (integer k).

    Examples:
        momentum_set(4, -1) -> [-4, -2, 0, 2]   (k = -2, -1, 0, 1)
        momentum_set(4, +1) -> [-3, -1, 1, 3]   (k = -3/2 ... 3/2)

    Args:
        n: Chain size (>= 2)
        sigma: Parity label (+1 or -1)

    Returns:
        Integer array of n doubled momenta in increasing order

    Raises:
        InvalidChainError: If n < 2 or sigma is not +-1
    """
    if n < 2:
        raise InvalidChainError(f"Chain size must be at least 2, got {n}")
    if sigma not in PARITIES:
        raise InvalidChainError(f"sigma must be +1 or -1, got {sigma}")

    shift = 1 if sigma == 1 else 0
    start = -2 * (n // 2) + shift
    stop = 2 * ((n - 1) // 2) + shift
    return np.arange(start, stop + 1, 2, dtype=np.int64)


def momenta(n: int, sigma: int) -> np.ndarray:
    """Momentum indices k of one parity sector as floats."""
    return momentum_set(n, sigma) / 2.0


def sector_angles(n: int, sigma: int) -> np.ndarray:
    """Angles w_k = 2 pi k / n of one parity sector."""
    return np.pi * momentum_set(n, sigma) / n


def single_fermion_energy(spec: ChainSpec, k: float) -> float:
    """
    Single-fermion energy lambda_k = b - v cos(2 pi k / n).

    Args:
        spec: Chain instance
        k: Momentum index (integer or half-integer)

    Returns:
        Energy lambda_k
    """
    return spec.b - spec.v * math.cos(2.0 * math.pi * k / spec.n)


def sector_energies(spec: ChainSpec, sigma: int) -> np.ndarray:
    """Energies lambda_k over K_sigma, in momentum_set order."""
    return spec.b - spec.v * np.cos(sector_angles(spec.n, sigma))


def many_body_energies(spec: ChainSpec) -> np.ndarray:
    """
    All 2^n eigenvalues from parity-consistent fermion occupations.

    E = sum_k (N_k - 1/2) lambda_k, over even occupations of K_+ and odd
    occupations of K_-.

    Args:
        spec: Chain instance (n <= 16)

    Returns:
        Sorted array of 2^n energies

    Raises:
        InvalidChainError: If n exceeds the enumeration limit
    """
    if spec.n > MAX_ENUMERATION_SITES:
        raise InvalidChainError(
            f"Many-body enumeration limited to n <= {MAX_ENUMERATION_SITES}, got {spec.n}"
        )

    patterns = np.arange(2 ** spec.n, dtype=np.int64)
    occupations = (patterns[:, None] >> np.arange(spec.n)) & 1
    counts = occupations.sum(axis=1)

    energies = []
    for sigma in PARITIES:
        lam = sector_energies(spec, sigma)
        wanted = 0 if sigma == 1 else 1
        occ = occupations[counts % 2 == wanted]
        energies.append(occ @ lam - 0.5 * lam.sum())

    return np.sort(np.concatenate(energies))


def ground_energy(spec: ChainSpec, N: int) -> float:
    """
    Lowest energy with N fermions (N up spins), filling the lowest levels.

    Args:
        spec: Chain instance
        N: Fermion number 0..n

    Returns:
        Energy of the lowest N-fermion state
    """
    if N < 0 or N > spec.n:
        raise InvalidChainError(f"Fermion number must be in 0..{spec.n}, got {N}")

    lam = np.sort(sector_energies(spec, 1 if N % 2 == 0 else -1))
    return float(lam[:N].sum() - 0.5 * lam.sum())


def critical_fields(spec: ChainSpec) -> CriticalFieldTable:
    """
    Ground-state transition fields N-1 -> N for N = 1..n.

    b_N = |v| cos[(N - 1/2) pi / n] / cos[pi / (2n)], scaled by cos(pi / n)
    for the odd antiferromagnetic ring.

    Args:
        spec: Chain instance

    Returns:
        Strictly decreasing CriticalFieldTable
    """
    n = spec.n
    N = np.arange(1, n + 1)
    fields = abs(spec.v) * np.cos((N - 0.5) * np.pi / n) / math.cos(math.pi / (2 * n))

    branch = BRANCH_REGULAR
    if spec.odd_af:
        fields = fields * math.cos(math.pi / n)
        branch = BRANCH_ODD_AF

    return CriticalFieldTable(fields=tuple(float(f) for f in fields), branch=branch)


def ground_sector(spec: ChainSpec) -> Tuple[int, bool]:
    """
    Fermion number of the ground state and whether it is degenerate.

    N is the unique index with b_{N+1} < b < b_N. Odd antiferromagnetic
    rings have a two-fold degenerate ground state for every 1 <= N <= n-1.

    Args:
        spec: Chain instance

    Returns:
        Tuple of (N, degenerate)

    Raises:
        LevelCrossingError: If b lies on a transition field
    """
    table = critical_fields(spec)
    fields = np.asarray(table.fields)
    tol = config.LEVEL_CROSSING_TOL * abs(spec.v)

    close = np.abs(fields - spec.b) < tol
    if close.any():
        N_cross = int(np.argmax(close)) + 1
        raise LevelCrossingError(
            f"Field b={spec.b} is at the transition field b_{N_cross}={fields[N_cross - 1]} "
            f"(n={spec.n}, v={spec.v})"
        )

    N = int(np.count_nonzero(fields > spec.b))
    degenerate = spec.odd_af and 1 <= N <= spec.n - 1
    return N, degenerate
