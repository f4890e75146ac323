"""
Exact finite-n, finite-T pair density and concurrence.

The thermal trace splits into the two fermion-number parities sigma. Within
a parity, number-projected statistics combine the two (sigma, nu) sectors as
(Z_0 O_0 + sigma Z_1 O_1) / (Z_0 + sigma Z_1); each sector is a free-fermion
Gaussian state, so the two-site observables follow from Wick contractions g_L.

The combination is taken relative to Z_0, where Z_1 / Z_0 = prod tanh(x_k / 2)
lies in [-1, 1] (x_k = beta lambda_k). Modes with |x_k| below SOFT_BETA_LAMBDA
enter the nu = 1 sector as explicit empty or filled states instead of through
their divergent occupation. When sigma Z_1 / Z_0 drops below
-CANCELLATION_RATIO the parity ensemble is expanded over its first excited
mode, which leaves only positive weights.
"""

import itertools
import math
from dataclasses import dataclass, field
from typing import List, Tuple

import numpy as np
from scipy import linalg
from scipy.special import expit, logsumexp, xlogy

from config import (
    config, FLAG_ASYMPTOTIC_MARGIN, FLAG_NEAR_SINGULAR, FLAG_PERTURBED,
)
from chain import (
    ChainError, ChainSpec, InvalidChainError, PARITIES, SectorKey,
    sector_angles, sector_energies,
)
from utils import setup_logging

logger = setup_logging(config.LOG_LEVEL, config.LOG_FILE or None, config.LOG_TO_CONSOLE)

# |beta lambda| below which a nu = 1 mode is summed as empty + filled
SOFT_BETA_LAMBDA = 1e-3
MAX_SOFT_MODES = 6

# -sigma Z_1 / Z_0 beyond which the parity ensemble is expanded over excitations
CANCELLATION_RATIO = 0.5

# Critical-field shifts keep beta * s inside this window
SHIFT_BETA_LAMBDA = (1e-7, 1e-6)

# beta * (|b| - |v|) beyond which exact sector sums underflow
UNDERFLOW_EXPONENT = 300.0


class NumericalConsistencyError(ChainError):
    """Raised when assembled probabilities violate their invariants."""
    pass


@dataclass(frozen=True)
class SignedLog:
    """A real number stored as sign and log-magnitude."""

    sign: int
    log_abs: float

    @property
    def value(self) -> float:
        if self.sign == 0:
            return 0.0
        return self.sign * math.exp(self.log_abs)


@dataclass(frozen=True)
class SectorContractions:
    """Signed log-weight of one (sigma, nu) sector and its contractions g_0..g_Lmax."""

    key: SectorKey
    log_weight: SignedLog
    g: np.ndarray
    flags: Tuple[str, ...] = ()

    def contraction(self, m: int) -> float:
        """Even-extended contraction, g_{-m} = g_m."""
        return float(self.g[abs(m)])


@dataclass(frozen=True)
class PairDensity:
    """
    Independent elements of the reduced two-qubit X-state.

    p_plus is the both-up probability, p_minus both-down, p each of the two
    one-up-one-down diagonal weights and alpha the coherence between them.
    """

    p_plus: float
    p: float
    p_minus: float
    alpha: float
    magnetization: float = 0.0
    flags: Tuple[str, ...] = field(default_factory=tuple)

    @classmethod
    def from_moments(
        cls,
        p_plus: float,
        occupation: float,
        alpha: float,
        flags: Tuple[str, ...] = ()
    ) -> "PairDensity":
        """
        Build the pair density from <n_i n_j>, <n_i> and the coherence.

        p_minus = p_plus + 1 - 2 <n_i> and p = <n_i> - p_plus. Values within
        PROBABILITY_SLACK of the [0, 1] boundary are clamped.

        Args:
            p_plus: Both-up probability
            occupation: Single-site occupation <n_i> = <s^z_i> + 1/2
            alpha: Off-diagonal coherence
            flags: Warning flags to carry along

        Returns:
            PairDensity

        Raises:
            NumericalConsistencyError: If an element falls outside [0, 1]
                by more than the slack, or p +- alpha < -slack
        """
        p_minus = p_plus + 1.0 - 2.0 * occupation
        p = occupation - p_plus

        slack = config.PROBABILITY_SLACK
        clamped = []
        for name, value in (("p_plus", p_plus), ("p", p), ("p_minus", p_minus)):
            if value < -slack or value > 1.0 + slack:
                raise NumericalConsistencyError(
                    f"{name}={value!r} outside [0, 1] (occupation={occupation!r}, alpha={alpha!r})"
                )
            clamped.append(min(max(value, 0.0), 1.0))
        p_plus, p, p_minus = clamped

        if p - abs(alpha) < -slack:
            raise NumericalConsistencyError(
                f"Negative singlet/triplet weight: p={p!r}, alpha={alpha!r}"
            )

        return cls(
            p_plus=p_plus,
            p=p,
            p_minus=p_minus,
            alpha=float(alpha),
            magnetization=float(occupation - 0.5),
            flags=tuple(flags),
        )

    def margin(self) -> float:
        """Entanglement margin |alpha| - sqrt(p_plus p_minus) before clamping."""
        return abs(self.alpha) - math.sqrt(self.p_plus * self.p_minus)




@dataclass(frozen=True)
class ParityEnsemble:
    """Log-weight of one fermion-number parity and its pair moments."""

    sigma: int
    log_weight: float
    occupation: float
    p_plus: float
    alpha: float
    flags: Tuple[str, ...] = ()


def _check_beta(beta: float) -> None:
    if not (beta > 0) or not math.isfinite(beta):
        raise InvalidChainError(f"Inverse temperature must be positive and finite, got {beta}")


def _log_one_plus_exp_neg(x: np.ndarray) -> np.ndarray:
    """log(1 + e^{-x})"""
    return np.logaddexp(0.0, -x)


def _log_one_minus_exp_neg(y: np.ndarray) -> np.ndarray:
    """log(1 - e^{-y}) for y >= 0"""
    y = np.asarray(y, dtype=float)
    with np.errstate(divide="ignore"):
        return np.where(y > math.log(2.0), np.log1p(-np.exp(-y)), np.log(-np.expm1(-y)))


def _log_abs_one_minus_exp_neg(x: np.ndarray) -> np.ndarray:
    """log|1 - e^{-x}|, -inf at x = 0"""
    return np.maximum(-x, 0.0) + _log_one_minus_exp_neg(np.abs(x))


def _log_abs_tanh_half(x: np.ndarray) -> np.ndarray:
    """log|tanh(x / 2)|"""
    y = np.abs(x)
    return _log_one_minus_exp_neg(y) - np.logaddexp(0.0, -y)


def sector_log_partition(spec: ChainSpec, beta: float, key: SectorKey) -> SignedLog:
    """
    Signed log of Z_nu^sigma = e^{beta b n / 2} prod_k (1 + (-1)^nu e^{-beta lambda_k}).

    Args:
        spec: Chain instance
        beta: Inverse temperature (> 0)
        key: Sector (sigma, nu)

    Returns:
        SignedLog with sign 0 for an exact-zero sector (some lambda_k = 0, nu = 1)
    """
    _check_beta(beta)
    x = beta * sector_energies(spec, key.sigma)
    prefactor = 0.5 * beta * spec.b * spec.n

    if key.nu == 0:
        return SignedLog(1, float(prefactor + _log_one_plus_exp_neg(x).sum()))

    if np.any(x == 0.0):
        return SignedLog(0, -math.inf)

    negatives = int(np.count_nonzero(x < 0))
    sign = -1 if negatives % 2 else 1
    return SignedLog(sign, float(prefactor + _log_abs_one_minus_exp_neg(x).sum()))


def occupations(spec: ChainSpec, beta: float, key: SectorKey) -> np.ndarray:
    """
    Sector occupations f_k = [1 + (-1)^nu e^{beta lambda_k}]^{-1}.

    Args:
        spec: Chain instance
        beta: Inverse temperature
        key: Sector (sigma, nu)

    Returns:
        Array of occupations over K_sigma
    """
    x = beta * sector_energies(spec, key.sigma)
    if key.nu == 0:
        return expit(-x)
    with np.errstate(over="ignore", divide="ignore"):
        return -1.0 / np.expm1(x)


def sector_contractions(
    spec: ChainSpec,
    beta: float,
    key: SectorKey,
    Lmax: int
) -> SectorContractions:
    """
    Contractions g_L = (1/n) sum_k f_k cos(L w_k) of one sector, L = 0..Lmax.

    Args:
        spec: Chain instance
        beta: Inverse temperature (> 0)
        key: Sector (sigma, nu)
        Lmax: Largest separation needed (<= n - 1)

    Returns:
        SectorContractions

    Raises:
        InvalidChainError: If Lmax is out of range
        NumericalConsistencyError: For an exact-zero sector
    """
    _check_beta(beta)
    if Lmax < 0 or Lmax > spec.n - 1:
        raise InvalidChainError(f"Lmax must be in 0..{spec.n - 1}, got {Lmax}")

    log_weight = sector_log_partition(spec, beta, key)
    if log_weight.sign == 0:
        raise NumericalConsistencyError(
            f"Exact-zero sector sigma={key.sigma}, nu={key.nu} at b={spec.b}, beta={beta}"
        )

    flags: Tuple[str, ...] = ()
    if key.nu == 1:
        smallest = float(np.min(np.abs(beta * sector_energies(spec, key.sigma))))
        if smallest < config.SINGULAR_BETA_LAMBDA:
            logger.warning(
                "Near-singular sector sigma=%d: min |beta lambda| = %s (n=%d, b=%s)",
                key.sigma, smallest, spec.n, spec.b,
            )
            flags = (FLAG_NEAR_SINGULAR,)

    w = sector_angles(spec.n, key.sigma)
    f = occupations(spec, beta, key)
    g = np.cos(np.outer(np.arange(Lmax + 1), w)) @ f / spec.n
    return SectorContractions(key=key, log_weight=log_weight, g=g, flags=flags)


def string_determinant(g: np.ndarray, L: int, phase: float = 0.0):
    """
    Determinant of the L x L string matrix (A_L)_ij = 2 g_{i-j+1} - delta_{i,j-1}.

    A real table is even-extended (g_{-m} = g_m); a complex table is
    Hermitian-extended (g_{-m} = conj(g_m)). A non-zero phase multiplies
    entry m by e^{i m phase}.

    Examples:
        L = 1 -> 2 g_1
        L = 2 -> 4 [g_1^2 - g_2 (g_0 - 1/2)]

    Args:
        g: Contractions g_0..g_K with K >= L
        L: Separation (>= 1)
        phase: Phase per unit index (0 for the real branch)

    Returns:
        Real determinant, or complex for a complex table or phase != 0
    """
    if L < 1:
        raise InvalidChainError(f"Separation must be at least 1, got {L}")
    g = np.asarray(g)
    if len(g) < L + 1:
        raise InvalidChainError(f"Contraction table needs indices up to {L}, has {len(g) - 1}")

    rows = np.arange(L)[:, None]
    cols = np.arange(L)[None, :]
    index = rows - cols + 1
    entries = g[np.abs(index)]
    if np.iscomplexobj(entries):
        entries = np.where(index < 0, np.conj(entries), entries)
    if phase:
        entries = entries * np.exp(1j * phase * index)
    matrix = 2.0 * entries - (cols == rows + 1)

    det = linalg.det(matrix, check_finite=False)
    if np.iscomplexobj(matrix):
        return complex(det)
    return float(np.real(det))


def _table_moments(g: np.ndarray, L: int) -> np.ndarray:
    """(<n_i>, <n_i n_j>, alpha) of a Gaussian state with contractions g_0..g_L."""
    g0 = float(np.real(g[0]))
    gL = float(abs(g[L]))
    # factored so a divergent occupation cancels between g_0 and g_L
    return np.array([g0, (g0 - gL) * (g0 + gL), 0.5 * np.real(string_determinant(g, L))])


def _occupation_moments(rows: np.ndarray, w: np.ndarray, n: int, L: int) -> np.ndarray:
    """Moments of the product states whose mode occupations are the rows."""
    waves = np.exp(1j * np.outer(w, np.arange(L + 1))) / n
    tables = np.atleast_2d(rows) @ waves
    return np.array([_table_moments(table, L) for table in tables])


def _parity_terms(spec: ChainSpec, beta: float, sigma: int) -> Tuple[np.ndarray, float, float]:
    """Scaled energies x_k, log Z_0^sigma and sigma Z_1^sigma / Z_0^sigma."""
    _check_beta(beta)
    x = beta * sector_energies(spec, sigma)
    log_z0 = 0.5 * beta * spec.b * spec.n + float(_log_one_plus_exp_neg(x).sum())
    negatives = int(np.count_nonzero(x < 0))
    sign = -sigma if negatives % 2 else sigma
    ratio = sign * math.exp(float(_log_abs_tanh_half(x).sum()))
    return x, log_z0, ratio


def _excitation_log_terms(x: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """
    Log-weights (relative to Z_0) of the first-excited-mode expansion.

    Relative to the lowest filling (N_k = 1 where x_k < 0) the parity needs
    an odd number of excitations. Term j has modes before j unexcited, mode j
    excited and an even number of excitations after it.

    Returns:
        Tuple of (log-weights, tail ratios prod_{i>j} |tanh(x_i / 2)|)
    """
    y = np.abs(x)
    log_unexcited = -np.logaddexp(0.0, -y)
    log_excited = -np.logaddexp(0.0, y)

    head = np.concatenate(([0.0], np.cumsum(log_unexcited)[:-1]))
    suffix = np.cumsum(_log_abs_tanh_half(x)[::-1])[::-1]
    tail_ratio = np.exp(np.concatenate((suffix[1:], [0.0])))
    return head + log_excited + np.log1p(tail_ratio) - math.log(2.0), tail_ratio


def _soft_modes(x: np.ndarray) -> np.ndarray:
    small = np.flatnonzero(np.abs(x) < SOFT_BETA_LAMBDA)
    return small[np.argsort(np.abs(x[small]), kind="stable")][:MAX_SOFT_MODES]


def _direct_ensemble(
    spec: ChainSpec,
    beta: float,
    sigma: int,
    L: int,
    x: np.ndarray,
    log_z0: float,
    ratio: float
) -> ParityEnsemble:
    base = sector_contractions(spec, beta, SectorKey(sigma, 0), L)
    moments = _table_moments(base.g, L)
    flags: List[str] = []

    soft = _soft_modes(x)
    if len(soft) == 0:
        projected = sector_contractions(spec, beta, SectorKey(sigma, 1), L)
        moments = moments + ratio * _table_moments(projected.g, L)
        flags.extend(projected.flags)
    else:
        hard = np.ones(len(x), dtype=bool)
        hard[soft] = False
        f0 = expit(-x[soft])
        states = np.array(list(itertools.product((0.0, 1.0), repeat=len(soft))))

        rows = np.zeros((len(states), len(x)))
        with np.errstate(over="ignore"):
            rows[:, hard] = -1.0 / np.expm1(x[hard])
        rows[:, soft] = states
        # nu = 1 weight of a soft mode: 1 - f0 empty, -f0 filled
        weights = np.where(states == 1.0, -f0, 1.0 - f0).prod(axis=1)
        scale = sigma * float(np.prod(np.tanh(0.5 * x[hard])))

        terms = _occupation_moments(rows, sector_angles(spec.n, sigma), spec.n, L)
        moments = moments + scale * (weights @ terms)

        smallest = float(np.abs(x).min())
        if smallest < config.SINGULAR_BETA_LAMBDA:
            logger.debug(
                "Near-singular sector sigma=%d: min |beta lambda| = %s (n=%d, b=%s)",
                sigma, smallest, spec.n, spec.b,
            )
            flags.append(FLAG_NEAR_SINGULAR)

    occupation, p_plus, alpha = moments / (1.0 + ratio)
    return ParityEnsemble(
        sigma=sigma,
        log_weight=log_z0 + math.log1p(ratio) - math.log(2.0),
        occupation=float(occupation),
        p_plus=float(p_plus),
        alpha=float(alpha),
        flags=tuple(flags),
    )


def _excitation_ensemble(
    spec: ChainSpec,
    sigma: int,
    L: int,
    x: np.ndarray,
    log_z0: float
) -> ParityEnsemble:
    log_terms, tail_ratio = _excitation_log_terms(x)
    log_total = float(logsumexp(log_terms))
    term_weights = np.exp(log_terms - log_total)

    lowest = (x < 0).astype(float)
    f0 = expit(-x)
    with np.errstate(over="ignore"):
        f1 = -1.0 / np.expm1(x)

    size = len(x)
    rows = np.empty((2 * size, size))
    coeffs = np.empty(2 * size)
    for j in range(size):
        for k, tail in enumerate((f0, f1)):
            row = rows[2 * j + k]
            row[:j] = lowest[:j]
            row[j] = 1.0 - lowest[j]
            row[j + 1:] = tail[j + 1:]
        # even excitations after j: (O_0 + P O_1) / (1 + P)
        coeffs[2 * j] = term_weights[j] / (1.0 + tail_ratio[j])
        coeffs[2 * j + 1] = term_weights[j] * tail_ratio[j] / (1.0 + tail_ratio[j])

    occupation, p_plus, alpha = coeffs @ _occupation_moments(rows, sector_angles(spec.n, sigma), spec.n, L)
    return ParityEnsemble(
        sigma=sigma,
        log_weight=log_z0 + log_total,
        occupation=float(occupation),
        p_plus=float(p_plus),
        alpha=float(alpha),
    )


def parity_ensemble(spec: ChainSpec, beta: float, sigma: int, L: int) -> ParityEnsemble:
    """
    Weight and pair moments of the physical states of one fermion parity.

    Args:
        spec: Chain instance
        beta: Inverse temperature (> 0)
        sigma: +1 for even, -1 for odd fermion number
        L: Separation 1..n-1

    Returns:
        ParityEnsemble with log_weight = log of its share of Z
    """
    x, log_z0, ratio = _parity_terms(spec, beta, sigma)
    if ratio < -CANCELLATION_RATIO:
        return _excitation_ensemble(spec, sigma, L, x, log_z0)
    return _direct_ensemble(spec, beta, sigma, L, x, log_z0, ratio)


def parity_log_partition(spec: ChainSpec, beta: float, sigma: int) -> float:
    """log Z^sigma = log[(Z_0^sigma + sigma Z_1^sigma) / 2]."""
    x, log_z0, ratio = _parity_terms(spec, beta, sigma)
    if ratio < -CANCELLATION_RATIO:
        return log_z0 + float(logsumexp(_excitation_log_terms(x)[0]))
    return log_z0 + math.log1p(ratio) - math.log(2.0)


def log_partition_function(spec: ChainSpec, beta: float) -> float:
    """
    log Z with Z = 1/2 sum_sigma (Z_0^sigma + sigma Z_1^sigma).

    Args:
        spec: Chain instance
        beta: Inverse temperature (> 0)

    Returns:
        Natural log of the partition function
    """
    return float(logsumexp([parity_log_partition(spec, beta, sigma) for sigma in PARITIES]))


def _near_singular(spec: ChainSpec, beta: float) -> bool:
    threshold = config.SINGULAR_BETA_LAMBDA
    for sigma in PARITIES:
        if np.min(np.abs(beta * sector_energies(spec, sigma))) < threshold:
            return True
    return False


def _assemble(spec: ChainSpec, beta: float, L: int) -> PairDensity:
    ensembles = [parity_ensemble(spec, beta, sigma, L) for sigma in PARITIES]
    logs = np.array([e.log_weight for e in ensembles])
    weights = np.exp(logs - logsumexp(logs))

    occupation = float(sum(w * e.occupation for w, e in zip(weights, ensembles)))
    p_plus = float(sum(w * e.p_plus for w, e in zip(weights, ensembles)))
    alpha = float(sum(w * e.alpha for w, e in zip(weights, ensembles)))
    flags = tuple(flag for e in ensembles for flag in e.flags)
    return PairDensity.from_moments(p_plus, occupation, alpha, flags)


def critical_shift(spec: ChainSpec, beta: float) -> float:
    """Field shift delta * max(|b|, |v|), clipped to SHIFT_BETA_LAMBDA / beta."""
    low, high = SHIFT_BETA_LAMBDA
    shift = config.PERTURBATION_DELTA * max(abs(spec.b), abs(spec.v))
    return min(max(shift, low / beta), high / beta)


def pair_density(spec: ChainSpec, T: float, L: int) -> PairDensity:
    """
    Thermal pair density of two qubits at separation L.

    A mode with lambda_k = 0 is handled exactly by the soft-mode sum, but at
    a field where some |beta lambda_k| < SINGULAR_BETA_LAMBDA the density is
    still reported as the average over b - s and b + s, flagged as
    critical-field-perturbed. The difference from the unshifted value is
    of order (beta s)^2.

    Args:
        spec: Chain instance
        T: Temperature (> 0)
        L: Separation 1..n-1

    Returns:
        PairDensity

    Raises:
        InvalidChainError: If T or L is out of range
        NumericalConsistencyError: If assembled probabilities are inconsistent
    """
    if not (T > 0) or not math.isfinite(T):
        raise InvalidChainError(f"Temperature must be positive and finite, got {T}")
    if L < 1 or L > spec.n - 1:
        raise InvalidChainError(f"Separation must be in 1..{spec.n - 1}, got {L}")

    beta = 1.0 / T
    if not _near_singular(spec, beta):
        return _assemble(spec, beta, L)

    shift = critical_shift(spec, beta)
    logger.warning(
        "Critical field perturbation at n=%d, b=%s, T=%s: averaging b +- %s",
        spec.n, spec.b, T, shift,
    )
    low = _assemble(spec.with_field(spec.b - shift), beta, L)
    high = _assemble(spec.with_field(spec.b + shift), beta, L)

    flags = tuple(dict.fromkeys((FLAG_PERTURBED,) + low.flags + high.flags))
    return PairDensity.from_moments(
        0.5 * (low.p_plus + high.p_plus),
        0.5 * (low.magnetization + high.magnetization) + 0.5,
        0.5 * (low.alpha + high.alpha),
        flags,
    )


def magnetization(spec: ChainSpec, T: float) -> float:
    """Thermal single-site magnetization <s^z>."""
    return pair_density(spec, T, 1).magnetization


def concurrence(pd: PairDensity) -> float:
    """
    Concurrence of an X-state: C = 2 max(0, |alpha| - sqrt(p_plus p_minus)).

    Args:
        pd: Pair density

    Returns:
        Concurrence in [0, 1]
    """
    return min(1.0, 2.0 * max(0.0, pd.margin()))


def entanglement_of_formation(C: float) -> float:
    """
    Entanglement of formation E = -sum q log2 q with q = (1 +- sqrt(1 - C^2)) / 2.

    Args:
        C: Concurrence in [0, 1]

    Returns:
        E in [0, 1]
    """
    if C < 0 or C > 1:
        raise InvalidChainError(f"Concurrence must be in [0, 1], got {C}")
    root = math.sqrt(max(0.0, 1.0 - C * C))
    q = np.array([(1.0 + root) / 2.0, (1.0 - root) / 2.0])
    return float(-xlogy(q, q).sum() / math.log(2.0))


def entanglement_margin(
    spec: ChainSpec,
    T: float,
    L: int,
    high_field_margin=None
) -> Tuple[float, Tuple[str, ...]]:
    """
    Sign function of entanglement: |alpha| - sqrt(p_plus p_minus) before clamping.

    Deep in the high-field regime, where the exact sector sums underflow,
    the leading-order high-field margin is returned instead. Only the sign
    is meaningful across the two regimes.

    Args:
        spec: Chain instance
        T: Temperature (> 0)
        L: Separation 1..n-1
        high_field_margin: Callable (n, v, beta, L) -> log-margin used in
            the underflow regime

    Returns:
        Tuple of (margin, flags)
    """
    beta = 1.0 / T
    if high_field_margin is not None and beta * (abs(spec.b) - abs(spec.v)) > UNDERFLOW_EXPONENT:
        return high_field_margin(spec.n, spec.v, beta, L), (FLAG_ASYMPTOTIC_MARGIN,)

    pd = pair_density(spec, T, L)
    return pd.margin(), pd.flags
