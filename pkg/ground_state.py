"""
Closed-form zero-temperature contractions and concurrences.

Each N-fermion ground state fills the N lowest single-fermion levels, so
its contractions are cosine sums over the filled momenta (a sine ratio in
closed form). For v < 0 the sea sits at pi and g_m picks up (-1)^m. Odd
antiferromagnetic rings have a two-fold degenerate ground state; its equal
mixture is described by the complex contractions g_m e^{i m pi / n}.
"""

import math
from dataclasses import dataclass
from typing import List, Optional

import numpy as np

from config import FLAG_GROUND_STATE
from chain import ChainSpec, InvalidChainError, canonical, critical_fields, ground_sector
from thermal import PairDensity, concurrence, string_determinant

# Concurrences at or below this count as separable when scanning ranges
RANGE_THRESHOLD = 1e-14


@dataclass(frozen=True)
class RangeWindow:
    """Field window (b_low, b_high) of one ground sector with its entanglement range."""

    N: int
    b_low: float
    b_high: float
    L_m: int


def _check_sector(n: int, N: int) -> None:
    if n < 2:
        raise InvalidChainError(f"Chain size must be at least 2, got {n}")
    if N < 0 or N > n:
        raise InvalidChainError(f"Fermion number must be in 0..{n}, got {N}")


def _check_branch(n: int, odd_af: bool) -> None:
    if odd_af and n % 2 == 0:
        raise InvalidChainError(f"The odd antiferromagnetic branch needs odd n, got n={n}")


def _sea_offsets(n: int, N: int) -> np.ndarray:
    """Momenta (N - 1 - 2j) pi / n of a Fermi sea centred on zero."""
    return (N - 1 - 2 * np.arange(N)) * np.pi / n


def gs_contraction(n: int, N: int, L: int) -> float:
    """
    Ground-state contraction g_L = sin(N L pi / n) / (n sin(L pi / n)), g_0 = N / n.

    Evaluated as the cosine sum over the filled momenta, which is exact
    for N = 1 and free of the sine-ratio rounding near L pi / n = pi.

    Examples:
        gs_contraction(40, 1, 7) -> 0.025
        gs_contraction(40, 40, 3) -> 0.0

    Args:
        n: Chain size
        N: Fermion number 0..n
        L: Separation 0..n-1

    Returns:
        Contraction g_L
    """
    _check_sector(n, N)
    if L < 0 or L > n - 1:
        raise InvalidChainError(f"Separation must be in 0..{n - 1}, got {L}")
    return float(gs_contraction_table(n, N, L)[L])


def gs_contraction_table(n: int, N: int, Lmax: int, antiferro: bool = False) -> np.ndarray:
    """
    Contractions g_0..g_Lmax of the N-fermion ground state.

    An antiferromagnetic coupling centres the sea on pi, which multiplies
    g_m by (-1)^m.
    """
    _check_sector(n, N)
    if Lmax < 0 or Lmax > n - 1:
        raise InvalidChainError(f"Lmax must be in 0..{n - 1}, got {Lmax}")

    L = np.arange(Lmax + 1)
    g = np.zeros(Lmax + 1)
    g[0] = N / n
    if 0 < N < n:
        g[1:] = np.cos(np.outer(L[1:], _sea_offsets(n, N))).sum(axis=1) / n
    if antiferro:
        g = g * (-1.0) ** L
    return g


def gs_pair_density(
    n: int,
    N: int,
    L: int,
    odd_af: bool = False,
    antiferro: Optional[bool] = None
) -> PairDensity:
    """
    Pair density of the N-fermion ground state (the degenerate mixture for odd_af).

    Args:
        n: Chain size
        N: Fermion number 0..n
        L: Separation 1..n-1
        odd_af: Odd antiferromagnetic branch
        antiferro: Coupling v < 0; flips the sign of alpha for odd L.
            Defaults to odd_af.

    Returns:
        PairDensity flagged as ground-state analytic
    """
    _check_branch(n, odd_af)
    if L < 1 or L > n - 1:
        raise InvalidChainError(f"Separation must be in 1..{n - 1}, got {L}")
    if antiferro is None:
        antiferro = odd_af

    g = gs_contraction_table(n, N, L, antiferro)
    g0, gL = g[0], abs(g[L])
    p_plus = (g0 - gL) * (g0 + gL)

    if odd_af:
        alpha = 0.5 * string_determinant(g, L, phase=math.pi / n).real
    else:
        alpha = 0.5 * string_determinant(g, L)

    return PairDensity.from_moments(p_plus, g0, alpha, (FLAG_GROUND_STATE,))


def gs_pair_density_for(spec: ChainSpec, L: int) -> PairDensity:
    """
    Pair density of the chain's own ground state at its field.

    Args:
        spec: Chain instance (field off any transition)
        L: Separation 1..n-1

    Returns:
        PairDensity flagged as ground-state analytic

    Raises:
        LevelCrossingError: If the field sits on a transition field
    """
    N, _ = ground_sector(spec)
    chain = canonical(spec)
    return gs_pair_density(chain.n, N, L, chain.odd_af, antiferro=chain.coupling_flipped)


def gs_concurrence(n: int, N: int, L: int, odd_af: bool = False) -> float:
    """
    Ground-state concurrence C_L = [|Det A_L| - 2 sqrt(p_plus p_minus)]_+.

    Product states (N = 0 or n) give 0.

    Examples:
        gs_concurrence(40, 1, 5) -> 0.05
        gs_concurrence(41, 1, 20, odd_af=True) -> ~0.00187

    Args:
        n: Chain size
        N: Fermion number 0..n
        L: Separation 1..n-1
        odd_af: Odd antiferromagnetic branch (requires odd n)

    Returns:
        Concurrence in [0, 1]
    """
    _check_sector(n, N)
    if N in (0, n):
        _check_branch(n, odd_af)
        return 0.0
    return concurrence(gs_pair_density(n, N, L, odd_af))


def entanglement_range(n: int, N: int, odd_af: bool = False) -> int:
    """
    Largest separation L <= [n/2] with a non-zero ground-state concurrence.

    Args:
        n: Chain size
        N: Fermion number
        odd_af: Odd antiferromagnetic branch

    Returns:
        L_m (0 when no pair is entangled)
    """
    _check_sector(n, N)
    _check_branch(n, odd_af)
    if N in (0, n):
        return 0

    L_m = 0
    for L in range(1, n // 2 + 1):
        if gs_concurrence(n, N, L, odd_af) > RANGE_THRESHOLD:
            L_m = L
    return L_m


def range_table(n: int, v: float) -> List[RangeWindow]:
    """
    Entanglement range of every ground sector N = 0..n with its field window.

    Args:
        n: Chain size
        v: Coupling

    Returns:
        One RangeWindow per sector, from the fully polarized N = 0 downward in field
    """
    spec = ChainSpec(n=n, v=v, b=0.0)
    table = critical_fields(spec)
    return [
        RangeWindow(
            N=N,
            b_low=table.field(N + 1),
            b_high=table.field(N),
            L_m=entanglement_range(n, N, spec.odd_af),
        )
        for N in range(n + 1)
    ]


def range_threshold_field(n: int, v: float, L: int) -> Optional[float]:
    """
    Field above which the ground-state range stays >= L all the way up to b_1.

    Walks the sectors downward from N = 1 and stops at the first one whose
    range drops below L.

    Args:
        n: Chain size
        v: Coupling
        L: Required range

    Returns:
        Lower edge b_{N*+1} of the last qualifying sector, or None when even
        N = 1 falls short
    """
    windows = range_table(n, v)
    last = None
    for window in windows[1:n]:
        if window.L_m < L:
            break
        last = window
    return None if last is None else last.b_low
