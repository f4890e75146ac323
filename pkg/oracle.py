"""
Exact diagonalization of small XX rings, independent of the fermion mapping.

The Hamiltonian is assembled in the computational basis, one block per
magnetization sector, and diagonalized densely. Thermal and ground states
are kept in their block spectral form; two-site reduced densities come from
a partial trace and their concurrence from the general Wootters formula.

Bit j of a configuration is site j; a set bit is spin up.
"""

from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence

import numpy as np
from scipy import linalg
from scipy.special import logsumexp

from config import config
from chain import ChainError, ChainSpec, CriticalFieldTable, critical_fields
from thermal import PairDensity
from utils import setup_logging

logger = setup_logging(config.LOG_LEVEL, config.LOG_FILE or None, config.LOG_TO_CONSOLE)

DEGENERACY_GAP = 1e-10
NEGATIVE_EIGENVALUE_TOL = 1e-10
TRACE_TOL = 1e-12

# (up-up, up-down, down-up, down-down) from the bit index 2 a_i + a_j
PAIR_BASIS_ORDER = [3, 2, 1, 0]

SIGMA_Y_PAIR = np.kron(
    np.array([[0.0, -1.0j], [1.0j, 0.0]]),
    np.array([[0.0, -1.0j], [1.0j, 0.0]]),
)


class OracleSizeError(ChainError, ValueError):
    """Raised when the ring is too large for dense diagonalization."""
    pass


class InvalidDensityError(ChainError, ValueError):
    """Raised for matrices that are not valid two-qubit density operators."""
    pass


@dataclass
class SpinBasisBlock:
    """Hamiltonian block of the sector with N up spins."""

    spec: ChainSpec
    N: int
    basis: np.ndarray
    H: np.ndarray

    def diagonalize(self):
        """Eigenvalues and eigenvectors of the block, ascending."""
        return linalg.eigh(self.H)


@dataclass
class ChainState:
    """
    Full-ring density operator in block spectral form.

    weights[i][a] is the probability of eigenvector vectors[i][:, a] of block i.
    """

    spec: ChainSpec
    blocks: List[SpinBasisBlock]
    energies: List[np.ndarray]
    vectors: List[np.ndarray]
    weights: List[np.ndarray]
    log_Z: Optional[float] = None

    @property
    def n(self) -> int:
        return self.spec.n


@dataclass
class TwoQubitDensity:
    """Two-qubit density matrix in the basis (up-up, up-down, down-up, down-down)."""

    matrix: np.ndarray

    def __post_init__(self):
        self.matrix = np.asarray(self.matrix)
        if self.matrix.shape != (4, 4):
            raise InvalidDensityError(f"Expected a 4x4 matrix, got shape {self.matrix.shape}")
        if not np.allclose(self.matrix, self.matrix.conj().T, atol=1e-12):
            raise InvalidDensityError("Density matrix is not Hermitian")
        trace = np.trace(self.matrix).real
        if abs(trace - 1.0) > TRACE_TOL:
            raise InvalidDensityError(f"Density matrix trace is {trace!r}, expected 1")
        smallest = float(np.min(np.linalg.eigvalsh(self.matrix)))
        if smallest < -NEGATIVE_EIGENVALUE_TOL:
            raise InvalidDensityError(f"Density matrix has eigenvalue {smallest!r}")

    def x_form_residual(self) -> float:
        """Largest magnitude among the entries an X-state must have zero."""
        mask = np.ones((4, 4), dtype=bool)
        mask[np.arange(4), np.arange(4)] = False
        mask[[0, 3, 1, 2], [3, 0, 2, 1]] = False
        return float(np.max(np.abs(self.matrix[mask])))


def build_blocks(spec: ChainSpec) -> List[SpinBasisBlock]:
    """
    Magnetization blocks of H = b S^z - (v/2) sum_j (s^+_j s^-_{j+1} + h.c.).

    Args:
        spec: Chain instance with n <= ED_MAX_SITES

    Returns:
        Blocks for N = 0..n

    Raises:
        OracleSizeError: If n exceeds the dense-diagonalization limit
    """
    n = spec.n
    if n > config.ED_MAX_SITES:
        raise OracleSizeError(f"Exact diagonalization limited to n <= {config.ED_MAX_SITES}, got {n}")

    configs = np.arange(2 ** n, dtype=np.int64)
    popcount = ((configs[:, None] >> np.arange(n)) & 1).sum(axis=1)
    bonds = [(j, (j + 1) % n) for j in range(n)]

    blocks = []
    for N in range(n + 1):
        basis = configs[popcount == N]
        index: Dict[int, int] = {int(c): a for a, c in enumerate(basis)}
        H = np.eye(len(basis)) * spec.b * (N - n / 2.0)

        for a, c in enumerate(basis):
            c = int(c)
            for i, j in bonds:
                if ((c >> i) ^ (c >> j)) & 1:
                    flipped = c ^ ((1 << i) | (1 << j))
                    H[index[flipped], a] -= 0.5 * spec.v

        blocks.append(SpinBasisBlock(spec=spec, N=N, basis=basis, H=H))
    return blocks


def spectrum(blocks: Sequence[SpinBasisBlock]) -> np.ndarray:
    """All 2^n energies, sorted."""
    return np.sort(np.concatenate([linalg.eigvalsh(block.H) for block in blocks]))


def thermal_state(blocks: Sequence[SpinBasisBlock], T: float) -> ChainState:
    """
    Gibbs state exp(-H/T)/Z in block spectral form.

    Args:
        blocks: Hamiltonian blocks
        T: Temperature (> 0)

    Returns:
        ChainState with log Z
    """
    if not (T > 0):
        raise ValueError(f"Temperature must be positive, got {T}")
    beta = 1.0 / T

    energies, vectors = zip(*(block.diagonalize() for block in blocks))
    exponents = [-beta * e for e in energies]
    log_Z = float(logsumexp(np.concatenate(exponents)))
    weights = [np.exp(x - log_Z) for x in exponents]

    return ChainState(
        spec=blocks[0].spec,
        blocks=list(blocks),
        energies=list(energies),
        vectors=list(vectors),
        weights=weights,
        log_Z=log_Z,
    )


def ground_state(blocks: Sequence[SpinBasisBlock]) -> ChainState:
    """
    Equal mixture over the (possibly degenerate) ground manifold.

    States within DEGENERACY_GAP |v| of the lowest energy share the weight.
    """
    energies, vectors = zip(*(block.diagonalize() for block in blocks))
    spec = blocks[0].spec
    E0 = min(float(e[0]) for e in energies)
    gap = DEGENERACY_GAP * abs(spec.v)

    masks = [e - E0 < gap for e in energies]
    count = sum(int(m.sum()) for m in masks)
    weights = [m.astype(float) / count for m in masks]
    if count > 1:
        logger.debug("Ground manifold of dimension %d at n=%d, b=%s", count, spec.n, spec.b)

    return ChainState(
        spec=spec,
        blocks=list(blocks),
        energies=list(energies),
        vectors=list(vectors),
        weights=weights,
    )


def ground_degeneracy(state: ChainState) -> int:
    """Number of states carrying weight in a ground-state mixture."""
    return int(sum(np.count_nonzero(w) for w in state.weights))


def partition_function(state: ChainState) -> float:
    """log Z of a thermal state."""
    if state.log_Z is None:
        raise ValueError("Ground-state mixtures carry no partition function")
    return state.log_Z


def reduced_pair_density(state: ChainState, i: int, j: int) -> TwoQubitDensity:
    """
    Two-site density rho_ij = Tr_{others} rho.

    Args:
        state: Full-ring state
        i: First site
        j: Second site (!= i)

    Returns:
        TwoQubitDensity ordered (up-up, up-down, down-up, down-down)
    """
    n = state.n
    if i == j or not (0 <= i < n and 0 <= j < n):
        raise ValueError(f"Need two distinct sites in 0..{n - 1}, got {i}, {j}")

    rho = np.zeros((2, 2, 2, 2))
    for block, vecs, w in zip(state.blocks, state.vectors, state.weights):
        keep = w > 0
        if not np.any(keep):
            continue
        columns = np.zeros((2 ** n, int(keep.sum())))
        columns[block.basis, :] = vecs[:, keep] * np.sqrt(w[keep])

        # site s lives on axis n - 1 - s
        psi = columns.reshape((2,) * n + (-1,))
        psi = np.moveaxis(psi, (n - 1 - i, n - 1 - j), (0, 1))
        traced = list(range(2, n + 1))
        rho += np.tensordot(psi, psi, axes=(traced, traced))

    rho = rho.reshape(4, 4)[np.ix_(PAIR_BASIS_ORDER, PAIR_BASIS_ORDER)]
    return TwoQubitDensity(matrix=rho)


def wootters_concurrence(rho: TwoQubitDensity) -> float:
    """
    Concurrence max(0, l1 - l2 - l3 - l4) from the square roots of the
    eigenvalues of rho (sy x sy) rho* (sy x sy), in decreasing order.
    """
    matrix = rho.matrix
    flipped = SIGMA_Y_PAIR @ matrix.conj() @ SIGMA_Y_PAIR
    eigs = np.linalg.eigvals(matrix @ flipped)
    roots = np.sort(np.sqrt(np.abs(eigs.real)))[::-1]
    return float(max(0.0, roots[0] - roots[1] - roots[2] - roots[3]))


def x_state_to_pair_density(rho: TwoQubitDensity) -> PairDensity:
    """Read p_plus, p, p_minus and alpha off an X-state."""
    m = rho.matrix.real
    p = 0.5 * (m[1, 1] + m[2, 2])
    return PairDensity.from_moments(m[0, 0], m[0, 0] + p, m[1, 2])


def oracle_pair_density(spec: ChainSpec, T: Optional[float], L: int) -> PairDensity:
    """Pair density at separation L from a thermal (T > 0) or ground (T None) state."""
    blocks = build_blocks(spec)
    state = ground_state(blocks) if T is None else thermal_state(blocks, T)
    return x_state_to_pair_density(reduced_pair_density(state, 0, L))


def oracle_critical_fields(spec: ChainSpec) -> CriticalFieldTable:
    """
    Transition fields from block ground energies.

    Block energies are linear in b with slope N - n/2, so the N-1 -> N
    crossing sits at b_N = e_{N-1} - e_N with e_N the lowest zero-field
    eigenvalue of block N.
    """
    blocks = build_blocks(spec.with_field(0.0))
    lowest = [float(linalg.eigvalsh(block.H)[0]) for block in blocks]
    fields = tuple(lowest[N - 1] - lowest[N] for N in range(1, spec.n + 1))
    return CriticalFieldTable(fields=fields, branch=critical_fields(spec).branch)


def max_concurrence_deviation(
    spec: ChainSpec,
    T: float,
    core_concurrence
) -> float:
    """
    Largest |C_core - C_oracle| over all separations at one (b, T).

    Args:
        spec: Chain instance
        T: Temperature
        core_concurrence: Callable (spec, T, L) -> concurrence

    Returns:
        Maximum absolute difference
    """
    state = thermal_state(build_blocks(spec), T)
    worst = 0.0
    for L in range(1, spec.n):
        c_oracle = wootters_concurrence(reduced_pair_density(state, 0, L))
        worst = max(worst, abs(core_concurrence(spec, T, L) - c_oracle))
    return worst
