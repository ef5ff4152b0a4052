"""Heat-bath algorithmic cooling with the partner-pairing algorithm.

A round ("iteration") is a compression, which sorts the diagonal of the
register state so that populations are non-increasing in basis index, followed
by an exchange of one register qubit with a fresh bath qubit. Imperfect control
appends independent depolarization of every register qubit to each
compression.

Runs work on the diagonal only: compressions are basis permutations and the
depolarizing model maps diagonal states to diagonal states. The dense-matrix
:func:`compression` and :func:`exchange` are kept for registers that carry
coherences (see :mod:`hbacqec.experiments`) and as an independent check.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from . import kernels, noise
from .qcore import DensityMatrix, UnitaryGate, apply_channel, partial_trace, permute_qubits, permutation_matrix

DIAGONAL_TOL = 1e-10


def _require_diagonal(rho: DensityMatrix):
    if not rho.is_diagonal(DIAGONAL_TOL):
        raise ValueError("state is not diagonal in the computational basis")


def compression_unitary(order) -> UnitaryGate:
    """Permutation unitary moving the population at ``order[k]`` to index ``k``."""
    order = np.asarray(order, dtype=int)
    target = np.empty_like(order)
    target[order] = np.arange(order.size)
    return UnitaryGate(permutation_matrix(target), name="compression", check=False)


class Compressed(NamedTuple):
    rho: DensityMatrix
    perm: np.ndarray


def compression(rho: DensityMatrix) -> Compressed:
    """Sort the diagonal of ``rho`` into non-increasing order by a basis permutation.

    ``perm`` lists source indices: the new population at ``k`` is the old one at
    ``perm[k]``. Ties keep their index order, so a sorted state gets the
    identity.
    """
    _require_diagonal(rho)
    order = kernels.sort_order(rho.diagonal())
    out = apply_channel(rho, compression_unitary(order))
    return Compressed(out, order)


def exchange(rho: DensityMatrix, target: int, bath: float) -> DensityMatrix:
    """Replace qubit ``target`` by a bath qubit of polarization ``bath``."""
    n = rho.n_qubits
    if not 0 <= target < n:
        raise ValueError(f"target qubit {target} out of range for {n} qubits")
    fresh = noise.thermal_state(bath, 1)
    if n == 1:
        return fresh
    rest = [q for q in range(n) if q != target]
    joint = partial_trace(rho, rest).tensor(fresh)
    # joint is ordered (rest..., target); move the bath qubit back into place
    order = list(np.argsort(rest + [target]))
    return permute_qubits(joint, order)


@dataclass(frozen=True)
class PPAConfig:
    n_register: int
    bath: float
    iterations: int
    exchange_target: int | None = None
    c: float = 0.0
    exchange_first: bool = False

    def __post_init__(self):
        if self.n_register < 2:
            raise ValueError("the register needs at least two qubits")
        if self.iterations < 0:
            raise ValueError("iterations must be non-negative")
        noise._check_probability("bath polarization", self.bath)
        noise._check_probability("c", self.c, noise.MAX_GATE_ERROR)
        if not 0 <= self.target < self.n_register:
            raise ValueError(f"exchange target {self.exchange_target} out of range")

    @property
    def target(self) -> int:
        return self.n_register - 1 if self.exchange_target is None else self.exchange_target


@dataclass(frozen=True, eq=False)
class PPATrace:
    """Diagonal after every elementary operation of a run.

    ``snapshots[0]`` is the initial diagonal; ``operations[k]`` names the
    operation that produced ``snapshots[k + 1]``.
    """

    config: PPAConfig
    snapshots: np.ndarray
    permutations: np.ndarray

    @property
    def operations(self) -> list[str]:
        pair = ["exchange", "compression"] if self.config.exchange_first else ["compression", "exchange"]
        return pair * self.config.iterations

    @property
    def final(self) -> np.ndarray:
        return self.snapshots[-1]

    def final_state(self) -> DensityMatrix:
        return DensityMatrix.from_diagonal(self.final, check=False)

    def after_iteration(self, k: int) -> np.ndarray:
        """Diagonal once ``k`` full iterations have completed."""
        return self.snapshots[2 * k]


def ppa_run(config: PPAConfig, initial: DensityMatrix | np.ndarray) -> PPATrace:
    """Alternate compression and exchange ``config.iterations`` times."""
    if isinstance(initial, DensityMatrix):
        _require_diagonal(initial)
        diag = initial.diagonal()
    else:
        diag = np.asarray(initial, dtype=float)
    if diag.size != 2**config.n_register:
        raise ValueError(f"initial state has dimension {diag.size}, expected {2 ** config.n_register}")
    snaps, orders = kernels.ppa_diag(diag, config.n_register, config.iterations, config.bath,
                                     config.target, config.c, config.exchange_first)
    return PPATrace(config, snaps, orders)


def qubit_ground_populations(diag: np.ndarray) -> np.ndarray:
    """Probability of ``|0>`` on each qubit of a diagonal state."""
    diag = np.asarray(diag, dtype=float)
    n = diag.size.bit_length() - 1
    t = diag.reshape((2,) * n)
    return np.array([t.take(0, axis=k).sum() for k in range(n)])


class RefreshMetrics(NamedTuple):
    rho00_pair: float
    message_pop: float
    ground_populations: tuple[float, ...]
    pair: tuple[int, int]
    message: int

    @property
    def polarizations(self) -> tuple[float, ...]:
        return tuple(2 * g - 1 for g in self.ground_populations)


def rank_by_polarization(diag) -> list[int]:
    pops = qubit_ground_populations(diag)
    return sorted(range(pops.size), key=lambda k: (-pops[k], k))


def refresh_metrics(rho: DensityMatrix | np.ndarray) -> RefreshMetrics:
    """Ancilla-pair and message quality of a diagonal register.

    The two most polarized qubits form the ancilla pair; the most polarized
    remaining qubit is the message.
    """
    if isinstance(rho, DensityMatrix):
        _require_diagonal(rho)
        diag = rho.diagonal()
    else:
        diag = np.asarray(rho, dtype=float)
    n = diag.size.bit_length() - 1
    if n < 3:
        raise ValueError("refresh metrics need at least three qubits")
    pops = qubit_ground_populations(diag)
    a, b, m = rank_by_polarization(diag)[:3]
    t = diag.reshape((2,) * n)
    others = tuple(k for k in range(n) if k not in (a, b))
    pair = t.sum(axis=others) if others else t
    return RefreshMetrics(float(pair[0, 0]), float(pops[m]), tuple(float(x) for x in pops), (a, b), m)
