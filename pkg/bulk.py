"""
Thermodynamic-limit contractions, special functions and high-field asymptotics.

For n -> infinity the momentum sums become integrals over [0, pi], evaluated
by composite Gauss-Legendre quadrature. Far above the saturation field the
pair density is dominated by the vacuum plus one- and two-fermion states,
which turns the concurrence into combinations of (projected) modified Bessel
functions.
"""

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Optional, Tuple

import numpy as np
from scipy import special
from scipy.optimize import brentq
from scipy.special import expit, logsumexp

from config import config, FLAG_HIGH_FIELD_VALIDITY
from chain import (
    ChainError, ChainSpec, InvalidChainError, PARITIES, sector_angles,
)
from thermal import PairDensity, SignedLog, concurrence, string_determinant
from utils import setup_logging

logger = setup_logging(config.LOG_LEVEL, config.LOG_FILE or None, config.LOG_TO_CONSOLE)

# scipy.special.iv overflows double precision past this argument
BESSEL_MAX_ARGUMENT = 700.0
BESSEL_MAX_ORDER = 200

THETA_TERM_CUTOFF = 1e-16


class QuadratureError(ChainError):
    """Raised when adaptive quadrature does not reach its tolerance."""
    pass


class BesselOverflowError(ChainError, OverflowError):
    """Raised when a Bessel argument exceeds the overflow guard."""
    pass


class BracketError(ChainError):
    """Raised when a root-finding bracket does not contain a sign change."""
    pass


@dataclass(frozen=True)
class QuadratureConfig:
    """Composite Gauss-Legendre rule on [0, pi] with panel doubling."""

    order: int = 32
    start_panels: int = 4
    max_panels: int = 4096
    tolerance: float = 1e-11
    fermi_split_beta: float = 50.0

    @classmethod
    def from_config(cls) -> "QuadratureConfig":
        return cls(
            order=config.QUAD_ORDER,
            start_panels=config.QUAD_START_PANELS,
            max_panels=config.QUAD_MAX_PANELS,
            tolerance=config.QUAD_TOLERANCE,
            fermi_split_beta=config.QUAD_FERMI_SPLIT_BETA,
        )


@dataclass(frozen=True)
class ProjectedBesselPair:
    """Parity-projected Bessel sums I_L^+ (half-integer k) and I_L^- (integer k)."""

    L: int
    x: float
    n: int
    plus: float
    minus: float


@lru_cache(maxsize=16)
def _leggauss(order: int) -> Tuple[np.ndarray, np.ndarray]:
    return np.polynomial.legendre.leggauss(order)


def _composite_nodes(
    breakpoints: Tuple[float, ...],
    panels: int,
    order: int
) -> Tuple[np.ndarray, np.ndarray]:
    """Nodes and weights of `panels` Gauss-Legendre panels on each segment."""
    base_nodes, base_weights = _leggauss(order)
    nodes = []
    weights = []
    for lo, hi in zip(breakpoints[:-1], breakpoints[1:]):
        if hi <= lo:
            continue
        edges = np.linspace(lo, hi, panels + 1)
        mid = 0.5 * (edges[:-1] + edges[1:])
        half = 0.5 * np.diff(edges)
        nodes.append((mid[:, None] + half[:, None] * base_nodes[None, :]).ravel())
        weights.append((half[:, None] * base_weights[None, :]).ravel())
    return np.concatenate(nodes), np.concatenate(weights)


def _zero_temperature_table(Lmax: int, b: float, v: float) -> np.ndarray:
    g = np.zeros(Lmax + 1)
    if b >= abs(v):
        return g
    if b <= -abs(v):
        g[0] = 1.0
        return g

    omega_f = math.acos(b / abs(v))
    L = np.arange(1, Lmax + 1)
    g[0] = omega_f / math.pi
    g[1:] = np.sin(L * omega_f) / (L * math.pi)
    if v < 0:
        # filled levels sit around w = pi
        g[1:] *= (-1.0) ** L
    return g


def bulk_contraction_table(
    Lmax: int,
    beta: Optional[float],
    b: float,
    v: float,
    quad: Optional[QuadratureConfig] = None
) -> np.ndarray:
    """
    Bulk contractions g_L = (1/pi) int_0^pi cos(L w) / (1 + e^{beta (b - v cos w)}) dw.

    beta = None or inf selects the closed-form zero-temperature branch.

    Args:
        Lmax: Largest separation
        beta: Inverse temperature, or None for T = 0
        b: Field
        v: Coupling (non-zero)
        quad: Quadrature settings (defaults from config)

    Returns:
        Array g_0..g_Lmax

    Raises:
        InvalidChainError: For invalid arguments
        QuadratureError: If panel doubling does not converge
    """
    if Lmax < 0:
        raise InvalidChainError(f"Lmax must be non-negative, got {Lmax}")
    if v == 0 or not math.isfinite(v) or not math.isfinite(b):
        raise InvalidChainError(f"Invalid coupling/field v={v}, b={b}")

    if beta is None or beta == math.inf:
        return _zero_temperature_table(Lmax, b, v)
    if not (beta > 0) or not math.isfinite(beta):
        raise InvalidChainError(f"Inverse temperature must be positive, got {beta}")

    quad = quad or QuadratureConfig.from_config()
    breakpoints: Tuple[float, ...] = (0.0, math.pi)
    if beta * abs(v) > quad.fermi_split_beta and abs(b) < abs(v):
        omega_f = math.acos(b / v)
        # the occupation step has width 1 / (beta |v| sin w_F) around w_F
        width = quad.fermi_split_beta / (beta * abs(v) * math.sin(omega_f))
        breakpoints = tuple(sorted({
            0.0, max(0.0, omega_f - width), omega_f, min(math.pi, omega_f + width), math.pi,
        }))

    L = np.arange(Lmax + 1)
    previous = None
    panels = quad.start_panels
    while panels <= quad.max_panels:
        w, weights = _composite_nodes(breakpoints, panels, quad.order)
        f = expit(-beta * (b - v * np.cos(w)))
        g = np.cos(np.outer(L, w)) @ (weights * f) / math.pi

        if previous is not None:
            scale = np.maximum(np.abs(g), 1e-3 * abs(g[0]))
            if np.all(np.abs(g - previous) <= quad.tolerance * scale):
                return g
        previous = g
        panels *= 2

    raise QuadratureError(
        f"Bulk quadrature did not converge for beta={beta}, b={b}, v={v} "
        f"at {quad.max_panels} panels"
    )


def bulk_contraction(
    L: int,
    beta: Optional[float],
    b: float,
    v: float,
    quad: Optional[QuadratureConfig] = None
) -> float:
    """Single bulk contraction g_L."""
    return float(bulk_contraction_table(L, beta, b, v, quad)[L])


def bulk_pair_density(
    L: int,
    beta: Optional[float],
    b: float,
    v: float,
    quad: Optional[QuadratureConfig] = None
) -> PairDensity:
    """
    Pair density of two qubits L sites apart on the infinite chain.

    Args:
        L: Separation (>= 1)
        beta: Inverse temperature, or None for T = 0
        b: Field
        v: Coupling

    Returns:
        PairDensity
    """
    if L < 1:
        raise InvalidChainError(f"Separation must be at least 1, got {L}")
    g = bulk_contraction_table(L, beta, b, v, quad)
    g0, gL = g[0], g[L]
    alpha = 0.5 * string_determinant(g, L)
    return PairDensity.from_moments((g0 - gL) * (g0 + gL), g0, alpha)


def bulk_concurrence(
    L: int,
    beta: Optional[float],
    b: float,
    v: float,
    quad: Optional[QuadratureConfig] = None
) -> float:
    """Concurrence C_L of the infinite chain."""
    return concurrence(bulk_pair_density(L, beta, b, v, quad))


def bessel_i(L: int, x: float) -> float:
    """
    Modified Bessel function of the first kind I_L(x).

    Evaluated as the exponent-scaled ive(L, x) times e^{|x|}.

    Args:
        L: Integer order 0..200
        x: Argument with |x| <= 700

    Returns:
        I_L(x)

    Raises:
        BesselOverflowError: If |x| exceeds the overflow guard
    """
    if L < 0 or L > BESSEL_MAX_ORDER or int(L) != L:
        raise InvalidChainError(f"Bessel order must be an integer in 0..{BESSEL_MAX_ORDER}, got {L}")
    if abs(x) > BESSEL_MAX_ARGUMENT:
        raise BesselOverflowError(f"Bessel argument |x|={abs(x)} exceeds {BESSEL_MAX_ARGUMENT}")
    return float(special.ive(L, x) * math.exp(abs(x)))


def bessel_i_asymptotic(L: int, x: float) -> float:
    """Large-x form e^x [1 + (1 - 4L^2) / (8x)] / sqrt(2 pi x)."""
    if x <= 0:
        raise InvalidChainError(f"Asymptotic form needs x > 0, got {x}")
    return math.exp(x) * (1.0 + (1.0 - 4.0 * L * L) / (8.0 * x)) / math.sqrt(2.0 * math.pi * x)


def bulk_high_field_margin(L: int, x: float) -> float:
    """
    Log-margin log(sqrt(2) |I_L(x)|) - log I_0(x) of the bulk high-field condition.

    Exponentially scaled Bessel functions keep this finite for any x.
    """
    ax = abs(x)
    coherence = special.ive(L, ax)
    if coherence <= 0:
        return -math.inf
    return math.log(math.sqrt(2.0) * coherence) - math.log(special.ive(0, ax))


def bulk_limit_temperature(L: int, v: float) -> float:
    """
    Plateau limit temperature of the infinite chain, from sqrt(2) I_L(x) = I_0(x).

    Examples:
        bulk_limit_temperature(1, 1.0) -> ~0.486
        bulk_limit_temperature(2, 1.0) -> ~0.16

    Args:
        L: Separation (>= 1)
        v: Coupling

    Returns:
        T_L = |v| / x

    Raises:
        BracketError: If [L^2/10, 10 L^2] does not bracket the root
    """
    if L < 1:
        raise InvalidChainError(f"Separation must be at least 1, got {L}")
    if v == 0:
        raise InvalidChainError("Coupling must be non-zero")

    def condition(x: float) -> float:
        return math.sqrt(2.0) * special.ive(L, x) - special.ive(0, x)

    lo, hi = L * L / 10.0, 10.0 * L * L
    if condition(lo) * condition(hi) > 0:
        raise BracketError(f"No sign change of the bulk plateau condition in [{lo}, {hi}] for L={L}")

    x = brentq(condition, lo, hi, rtol=1e-10, xtol=1e-14)
    return abs(v) / x


def concurrence_envelope(L: int, t: float, b: float, v: float) -> float:
    """
    Scaling envelope e^{-(b/|v| - 1) L^2 / t} f(t) / L of the bulk concurrence.

    f(t) = sqrt(2t/pi) [e^{-t/2} - sqrt(1 - e^{-t})] vanishes at t = ln 2.

    Args:
        L: Separation (>= 1)
        t: Scaled temperature L^2 T / |v| (> 0)
        b: Field (above |v|)
        v: Coupling

    Returns:
        Envelope value (0 when f(t) <= 0)
    """
    if L < 1 or not (t > 0):
        raise InvalidChainError(f"Need L >= 1 and t > 0, got L={L}, t={t}")
    if b <= abs(v):
        raise InvalidChainError(f"Envelope applies above saturation, got b={b}, |v|={abs(v)}")

    f = math.sqrt(2.0 * t / math.pi) * (math.exp(-t / 2.0) - math.sqrt(-math.expm1(-t)))
    if f <= 0:
        return 0.0
    return math.exp(-(b / abs(v) - 1.0) * L * L / t) * f / L


def _projection_weights(L: int, n: int, sigma: int) -> Tuple[np.ndarray, np.ndarray]:
    w = sector_angles(n, sigma)
    c = np.cos(L * w)
    # exact zeros (e.g. L = n/2 on half-integer momenta)
    c[np.abs(c) < 1e-14] = 0.0
    return np.cos(w), c


def projected_bessel(L: int, x: float, n: int, sigma: int) -> float:
    """
    Parity-projected Bessel sum I_L^sigma(x) = (1/n) sum_{k in K_sigma} e^{x cos w_k} cos(L w_k).

    Args:
        L: Order 0..n
        x: Argument (beta v)
        n: Chain size
        sigma: Parity label

    Returns:
        I_L^sigma(x)
    """
    return log_projected_bessel(L, x, n, sigma).value


def log_projected_bessel(L: int, x: float, n: int, sigma: int) -> SignedLog:
    """Signed log of I_L^sigma(x), finite for any x."""
    if n < 2 or L < 0 or L > n:
        raise InvalidChainError(f"Need n >= 2 and 0 <= L <= n, got n={n}, L={L}")
    cos_w, c = _projection_weights(L, n, sigma)
    with np.errstate(divide="ignore"):
        log_abs, sign = logsumexp(x * cos_w, b=c, return_sign=True)
    if sign == 0 or not math.isfinite(log_abs):
        return SignedLog(0, -math.inf)
    return SignedLog(int(sign), float(log_abs - math.log(n)))


def projected_bessel_pair(L: int, x: float, n: int) -> ProjectedBesselPair:
    """Both parity projections of I_L at one argument."""
    return ProjectedBesselPair(
        L=L, x=x, n=n,
        plus=projected_bessel(L, x, n, 1),
        minus=projected_bessel(L, x, n, -1),
    )


def _log_coherence_and_product(n: int, x: float, L: int) -> Tuple[float, float]:
    """
    log|I_L^-(x)| and 1/2 log(I_0^{+2} - I_L^{+2}).

    The difference of squares is factored as the two positive sums
    (1/n) sum_{K+} (1 -+ cos L w) e^{x cos w}.
    """
    log_a = log_projected_bessel(L, x, n, -1).log_abs

    cos_w, c = _projection_weights(L, n, 1)
    with np.errstate(divide="ignore"):
        log_minus = logsumexp(x * cos_w, b=1.0 - c)
        log_plus = logsumexp(x * cos_w, b=1.0 + c)
    log_d = 0.5 * (log_minus + log_plus) - math.log(n)
    return float(log_a), float(log_d)


def high_field_margin(n: int, v: float, beta: float, L: int) -> float:
    """
    Log-margin of the plateau condition |I_L^-| > sqrt(I_0^{+2} - I_L^{+2}) at x = beta v.

    Positive exactly when the condition holds; independent of the field.
    """
    log_a, log_d = _log_coherence_and_product(n, beta * v, L)
    return log_a - log_d


def high_field_concurrence(spec: ChainSpec, beta: float, L: int) -> float:
    """
    High-field concurrence 2 e^{-beta|b|} [|I_L^-| - sqrt(I_0^{+2} - I_L^{+2})]_+.

    Args:
        spec: Chain instance
        beta: Inverse temperature
        L: Separation 1..n-1

    Returns:
        Leading-order concurrence
    """
    if L < 1 or L > spec.n - 1:
        raise InvalidChainError(f"Separation must be in 1..{spec.n - 1}, got {L}")
    if high_field_flags(spec, beta):
        logger.warning(
            "High-field formula outside its regime: n=%d, b=%s, T=%s",
            spec.n, spec.b, 1.0 / beta,
        )

    log_a, log_d = _log_coherence_and_product(spec.n, beta * spec.v, L)
    shift = beta * abs(spec.b)
    return 2.0 * max(0.0, math.exp(log_a - shift) - math.exp(log_d - shift))


def high_field_pair_density(spec: ChainSpec, beta: float, L: int) -> PairDensity:
    """
    Leading-order pair density elements in the high-field regime.

    alpha ~ e^{-beta|b|} |I_L^-|, p_plus ~ e^{-2 beta|b|}(I_0^{+2} - I_L^{+2})
    and <n_i> ~ e^{-beta|b|} I_0^-, mirrored under spin flip for b < 0.
    The elements are approximations and are not normalization-checked.
    """
    x = beta * spec.v
    shift = beta * abs(spec.b)
    log_a, log_d = _log_coherence_and_product(spec.n, x, L)
    occupation = math.exp(log_projected_bessel(0, x, spec.n, -1).log_abs - shift)
    alpha = math.exp(log_a - shift)
    p_plus = math.exp(2.0 * (log_d - shift))
    p_minus = p_plus + 1.0 - 2.0 * occupation

    if spec.b < 0:
        p_plus, p_minus = p_minus, p_plus
        occupation = 1.0 - occupation

    return PairDensity(
        p_plus=p_plus,
        p=occupation - p_plus,
        p_minus=p_minus,
        alpha=alpha,
        magnetization=occupation - 0.5,
        flags=high_field_flags(spec, beta),
    )


def high_field_flags(spec: ChainSpec, beta: float) -> Tuple[str, ...]:
    """Validity flag when e^{-beta(|b| - |v|)} is not small."""
    if -beta * (abs(spec.b) - abs(spec.v)) >= math.log(config.HIGH_FIELD_VALIDITY):
        return (FLAG_HIGH_FIELD_VALIDITY,)
    return ()


def high_field_partition(spec: ChainSpec, beta: float) -> float:
    """
    log Z from the vacuum plus one- and two-fermion states.

    Z ~ e^{beta|b|n/2} [1 + n e^{-beta|b|} I_0^-(x)
        + e^{-2 beta|b|} (n^2 I_0^+(x)^2 - n I_0^+(2x)) / 2]

    Args:
        spec: Chain instance
        beta: Inverse temperature

    Returns:
        Approximate log Z
    """
    n = spec.n
    x = beta * spec.v
    q = math.exp(-beta * abs(spec.b))
    one = n * projected_bessel(0, x, n, -1)
    two = 0.5 * (n * n * projected_bessel(0, x, n, 1) ** 2 - n * projected_bessel(0, 2.0 * x, n, 1))
    return 0.5 * beta * abs(spec.b) * n + math.log1p(q * one + q * q * two)


def _theta_series(u: float, offset: float, alternating: bool) -> float:
    if not (0.0 <= u < 1.0):
        raise InvalidChainError(f"Theta argument must be in [0, 1), got {u}")
    total = 0.0
    j = 0
    while True:
        k = j + offset
        if k == 0:
            j += 1
            continue
        term = u ** (k * k)
        if term < THETA_TERM_CUTOFF:
            break
        total += -term if (alternating and j % 2) else term
        j += 1
    return 2.0 * total


def theta2(u: float) -> float:
    """theta_2(u) = 2 sum_{k = 1/2, 3/2, ...} u^{k^2}"""
    return _theta_series(u, 0.5, alternating=False)


def theta4(u: float) -> float:
    """theta_4(u) = 1 + 2 sum_{k >= 1} (-1)^k u^{k^2}"""
    return 1.0 + _theta_series(u, 0.0, alternating=True)


def theta_projected_bessel(n: int, x: float, sigma: int) -> float:
    """
    Large-n theta form of I_0^+ (sigma = +1) or I_{n/2}^- (sigma = -1).

    Returns e^x theta(e^{-2 x pi^2 / n^2}) / n with theta_2 or theta_4.
    """
    if sigma not in PARITIES:
        raise InvalidChainError(f"sigma must be +1 or -1, got {sigma}")
    if x <= 0:
        raise InvalidChainError(f"Theta form needs x > 0, got {x}")
    u = math.exp(-2.0 * x * math.pi ** 2 / n ** 2)
    theta = theta2(u) if sigma == 1 else theta4(u)
    return math.exp(x) * theta / n


def distant_pair_T(n: int, v: float, odd_af: bool = False) -> float:
    """
    Closed-form plateau limit temperature of the most distant pairs.

    Examples:
        distant_pair_T(40, 1.0) -> 2 pi / 1600 ~ 0.00393

    Args:
        n: Chain size (>= 4)
        v: Coupling
        odd_af: Odd antiferromagnetic ring

    Returns:
        T_{[n/2]}
    """
    if n < 4:
        raise InvalidChainError(f"Closed form needs n >= 4, got {n}")
    if odd_af:
        return abs(v) * math.pi ** 2 / (2.0 * n * n * math.log(2.0 * math.sqrt(2.0) * n / math.pi))
    return 2.0 * math.pi * abs(v) / (n * n)
