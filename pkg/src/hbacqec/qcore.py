"""Dense density-matrix and Kraus-channel algebra for small qubit registers.

Conventions
-----------
Qubit 0 is the most significant bit of a computational-basis index, so the
basis state ``|q0 q1 ... q_{n-1}>`` has index ``sum(q_k * 2**(n-1-k))``.
Circuit diagrams are read top to bottom as qubit 0 .. n-1.

Kraus sets are stored as a single ``(k, d_out, d_in)`` complex array. They are
never pruned or re-orthogonalised, so the operator count of a composite is the
product of the counts of its parts.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

HERMITIAN_TOL = 1e-12
TRACE_TOL = 1e-12
PSD_TOL = 1e-10
UNITARY_TOL = 1e-12
CHANNEL_TOL = 1e-10
FIDELITY_AGREEMENT_TOL = 1e-12

MAX_QUBITS = 8


def _n_qubits_of(dim: int) -> int:
    n = int(dim).bit_length() - 1
    if dim < 1 or 2**n != dim:
        raise ValueError(f"dimension {dim} is not a power of two")
    return n


def _check_targets(targets: Sequence[int], n: int) -> tuple[int, ...]:
    targets = tuple(int(t) for t in targets)
    if len(set(targets)) != len(targets):
        raise ValueError(f"duplicate target qubits in {targets}")
    for t in targets:
        if not 0 <= t < n:
            raise ValueError(f"target qubit {t} out of range for {n} qubits")
    return targets


# ---------------------------------------------------------------------------
# Value types
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    """Hermitian, unit-trace, positive semidefinite matrix on ``n`` qubits.

    The wrapped array is made read-only. Pass ``check=False`` to skip the
    (eigenvalue-based) validation for internally produced states.
    """

    data: np.ndarray
    check: bool = field(default=True, repr=False)

    def __post_init__(self):
        arr = np.array(self.data, dtype=complex)
        if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
            raise ValueError(f"density matrix must be square, got {arr.shape}")
        _n_qubits_of(arr.shape[0])
        arr.setflags(write=False)
        object.__setattr__(self, "data", arr)
        if self.check:
            self.validate()

    @property
    def dim(self) -> int:
        return self.data.shape[0]

    @property
    def n_qubits(self) -> int:
        return _n_qubits_of(self.dim)

    def validate(self) -> None:
        """Raise ``ValueError`` if any state invariant is violated."""
        herm = np.max(np.abs(self.data - self.data.conj().T))
        if herm > HERMITIAN_TOL:
            raise ValueError(f"not Hermitian (max deviation {herm:.3g})")
        tr = np.trace(self.data)
        if abs(tr - 1.0) > TRACE_TOL:
            raise ValueError(f"trace {tr.real:.15g} differs from 1")
        lam = np.linalg.eigvalsh((self.data + self.data.conj().T) / 2).min()
        if lam < -PSD_TOL:
            raise ValueError(f"not positive semidefinite (min eigenvalue {lam:.3g})")

    def diagonal(self) -> np.ndarray:
        return self.data.diagonal().real.copy()

    def is_diagonal(self, tol: float = 1e-10) -> bool:
        off = self.data - np.diag(self.data.diagonal())
        return bool(np.max(np.abs(off), initial=0.0) < tol)

    @classmethod
    def from_diagonal(cls, probs, check: bool = True) -> "DensityMatrix":
        return cls(np.diag(np.asarray(probs, dtype=float)), check=check)

    @classmethod
    def from_pure(cls, psi) -> "DensityMatrix":
        psi = np.asarray(psi, dtype=complex).reshape(-1)
        psi = psi / np.linalg.norm(psi)
        return cls(np.outer(psi, psi.conj()))

    @classmethod
    def basis(cls, index: int, n_qubits: int) -> "DensityMatrix":
        psi = np.zeros(2**n_qubits)
        psi[index] = 1.0
        return cls.from_pure(psi)

    def tensor(self, other: "DensityMatrix") -> "DensityMatrix":
        return DensityMatrix(np.kron(self.data, other.data), check=False)


class ChoiState(DensityMatrix):
    """Choi state ``(L x 1)[|Omega><Omega|]`` of a square channel, on ``2n`` qubits.

    The channel acts on the first ``n`` qubits, the reference on the last ``n``.
    """


@dataclass(frozen=True, eq=False)
class UnitaryGate:
    matrix: np.ndarray
    name: str = ""
    check: bool = field(default=True, repr=False)

    def __post_init__(self):
        arr = np.array(self.matrix, dtype=complex)
        if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
            raise ValueError(f"gate matrix must be square, got {arr.shape}")
        _n_qubits_of(arr.shape[0])
        arr.setflags(write=False)
        object.__setattr__(self, "matrix", arr)
        if self.check:
            dev = np.max(np.abs(arr.conj().T @ arr - np.eye(arr.shape[0])))
            if dev > UNITARY_TOL:
                raise ValueError(f"matrix is not unitary (deviation {dev:.3g})")

    @property
    def n_qubits(self) -> int:
        return _n_qubits_of(self.matrix.shape[0])

    def __matmul__(self, other: "UnitaryGate") -> "UnitaryGate":
        """Matrix product; ``a @ b`` applies ``b`` first."""
        return UnitaryGate(self.matrix @ other.matrix, check=False)

    def dagger(self) -> "UnitaryGate":
        return UnitaryGate(self.matrix.conj().T, name=self.name + "^dag", check=False)

    def on(self, targets: Sequence[int], n_qubits: int) -> "UnitaryGate":
        """Embed this gate on ``targets`` of an ``n_qubits`` register."""
        full = embed_operator(self.matrix, targets, n_qubits)
        return UnitaryGate(full, name=self.name, check=False)

    def as_channel(self) -> "KrausChannel":
        return KrausChannel(self.matrix[None, :, :])


@dataclass(frozen=True, eq=False)
class KrausChannel:
    """Completely positive map ``rho -> sum_j K_j rho K_j^dagger``.

    ``operators`` has shape ``(k, d_out, d_in)``; a single 2-D matrix is
    accepted as a one-operator channel.
    """

    operators: np.ndarray

    def __post_init__(self):
        ops = np.array(self.operators, dtype=complex)
        if ops.ndim == 2:
            ops = ops[None, :, :]
        if ops.ndim != 3 or ops.shape[0] == 0:
            raise ValueError("Kraus operators must form a non-empty (k, d_out, d_in) stack")
        ops.setflags(write=False)
        object.__setattr__(self, "operators", ops)

    @property
    def d_in(self) -> int:
        return self.operators.shape[2]

    @property
    def d_out(self) -> int:
        return self.operators.shape[1]

    @property
    def n_operators(self) -> int:
        return self.operators.shape[0]

    @property
    def is_square(self) -> bool:
        return self.d_in == self.d_out

    def __len__(self):
        return self.n_operators

    def __iter__(self):
        return iter(self.operators)

    @classmethod
    def identity(cls, n_qubits: int) -> "KrausChannel":
        return cls(np.eye(2**n_qubits)[None, :, :])


@dataclass(frozen=True)
class ChannelReport:
    cptp: bool
    unital: bool
    max_violation: float
    unital_violation: float


# ---------------------------------------------------------------------------
# Gates
# ---------------------------------------------------------------------------

_I2 = np.eye(2, dtype=complex)
_X = np.array([[0, 1], [1, 0]], dtype=complex)
_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
_Z = np.array([[1, 0], [0, -1]], dtype=complex)
_H = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)

PAULIS = {"I": _I2, "X": _X, "Y": _Y, "Z": _Z}


def kron_all(mats) -> np.ndarray:
    out = np.eye(1, dtype=complex)
    for m in mats:
        out = np.kron(out, m)
    return out


def permutation_matrix(perm: Sequence[int]) -> np.ndarray:
    """Unitary mapping basis state ``|j>`` to ``|perm[j]>``."""
    perm = np.asarray(perm, dtype=int)
    d = perm.size
    if sorted(perm.tolist()) != list(range(d)):
        raise ValueError("not a permutation of range(d)")
    mat = np.zeros((d, d), dtype=complex)
    mat[perm, np.arange(d)] = 1.0
    return mat


def _controlled_x_perm(n_controls: int) -> list[int]:
    n = n_controls + 1
    perm = list(range(2**n))
    # target is the last qubit; flips when every control is set
    top = 2**n - 2
    perm[top], perm[top + 1] = top + 1, top
    return perm


def standard_gate(name: str, n_targets: int | None = None, perm: Sequence[int] | None = None) -> UnitaryGate:
    """Return a named gate as a :class:`UnitaryGate`.

    Single-qubit gates (``H``, ``X``, ``Y``, ``Z``) are tensored ``n_targets``
    times. ``CNOT`` and ``TOFFOLI`` put their controls first and the target on
    the last qubit. ``PERMUTATION`` requires ``perm``, mapping ``|j>`` to
    ``|perm[j]>``.
    """
    key = name.upper()
    if key in ("H", "X", "Y", "Z"):
        n = 1 if n_targets is None else int(n_targets)
        if n < 1:
            raise ValueError("n_targets must be at least 1")
        base = _H if key == "H" else PAULIS[key]
        return UnitaryGate(kron_all([base] * n), name=key, check=False)
    if key in ("CNOT", "CX"):
        _expect_arity(key, n_targets, 2)
        return UnitaryGate(permutation_matrix(_controlled_x_perm(1)), name="CNOT", check=False)
    if key in ("TOFFOLI", "CCX", "CCNOT"):
        _expect_arity(key, n_targets, 3)
        return UnitaryGate(permutation_matrix(_controlled_x_perm(2)), name="TOFFOLI", check=False)
    if key == "SWAP":
        _expect_arity(key, n_targets, 2)
        return UnitaryGate(permutation_matrix([0, 2, 1, 3]), name="SWAP", check=False)
    if key in ("PERMUTATION", "PERM"):
        if perm is None:
            raise ValueError("PERMUTATION requires a permutation")
        mat = permutation_matrix(perm)
        if n_targets is not None and mat.shape[0] != 2**n_targets:
            raise ValueError("permutation length does not match n_targets")
        return UnitaryGate(mat, name="PERMUTATION", check=False)
    raise ValueError(f"unknown gate {name!r}")


def _expect_arity(name, n_targets, arity):
    if n_targets is not None and n_targets != arity:
        raise ValueError(f"{name} acts on exactly {arity} qubits, got {n_targets}")


def embed_operator(op: np.ndarray, targets: Sequence[int], n_qubits: int) -> np.ndarray:
    """Full ``2**n`` matrix of ``op`` acting on ``targets`` (in that order)."""
    op = np.asarray(op, dtype=complex)
    targets = _check_targets(targets, n_qubits)
    k = len(targets)
    if op.shape != (2**k, 2**k):
        raise ValueError(f"operator shape {op.shape} does not match {k} target qubits")
    rest = [q for q in range(n_qubits) if q not in targets]
    full = np.kron(op, np.eye(2 ** len(rest)))
    order = list(targets) + rest
    # axes of `full` are (order..., order...); move them to natural order
    inv = np.argsort(order)
    t = full.reshape((2,) * (2 * n_qubits))
    t = t.transpose(list(inv) + [n_qubits + i for i in inv])
    return t.reshape(2**n_qubits, 2**n_qubits)


# ---------------------------------------------------------------------------
# Channel algebra
# ---------------------------------------------------------------------------


def _as_array(rho) -> np.ndarray:
    return rho.data if isinstance(rho, DensityMatrix) else np.asarray(rho, dtype=complex)


def apply_kraus_array(rho: np.ndarray, ops: np.ndarray, targets: Sequence[int], n_qubits: int) -> np.ndarray:
    """Array-level kernel behind :func:`apply_channel` (no validation of the result)."""
    k_in = _n_qubits_of(ops.shape[2])
    if len(targets) != k_in:
        raise ValueError(f"channel acts on {k_in} qubits but {len(targets)} targets given")
    targets = _check_targets(targets, n_qubits)
    if ops.shape[1] != ops.shape[2]:
        if sorted(targets) != list(range(n_qubits)):
            raise ValueError("non-square channels must act on the whole register")
        x = _permute_qubits(rho, targets, n_qubits)
        return np.einsum("kab,bc,kdc->ad", ops, x, ops.conj(), optimize=True)
    if tuple(targets) == tuple(range(n_qubits)):
        return np.einsum("kab,bc,kdc->ad", ops, rho, ops.conj(), optimize=True)
    rest = [q for q in range(n_qubits) if q not in targets]
    order = list(targets) + rest
    d_t, d_r = 2**k_in, 2 ** len(rest)
    x = _permute_qubits(rho, order, n_qubits).reshape(d_t, d_r, d_t, d_r)
    y = np.einsum("kab,brcs,kdc->ards", ops, x, ops.conj(), optimize=True)
    y = y.reshape(d_t * d_r, d_t * d_r)
    return _permute_qubits(y, list(np.argsort(order)), n_qubits)


def _permute_qubits(rho: np.ndarray, order: Sequence[int], n_qubits: int) -> np.ndarray:
    """Reorder qubits so that new qubit ``i`` is old qubit ``order[i]``."""
    order = list(order)
    if order == list(range(n_qubits)):
        return rho
    t = rho.reshape((2,) * (2 * n_qubits))
    t = t.transpose(order + [n_qubits + q for q in order])
    return t.reshape(rho.shape)


def permute_qubits(rho: DensityMatrix, order: Sequence[int]) -> DensityMatrix:
    order = _check_targets(order, rho.n_qubits)
    if len(order) != rho.n_qubits:
        raise ValueError("order must list every qubit exactly once")
    return DensityMatrix(_permute_qubits(rho.data, order, rho.n_qubits), check=False)


def apply_channel(rho: DensityMatrix, chan: KrausChannel | UnitaryGate, targets: Sequence[int] | None = None) -> DensityMatrix:
    """Apply ``chan`` to the ``targets`` qubits of ``rho`` (all qubits by default)."""
    if isinstance(chan, UnitaryGate):
        chan = chan.as_channel()
    n = rho.n_qubits
    if targets is None:
        targets = range(n)
    targets = list(targets)
    if chan.d_in != 2 ** len(targets):
        raise ValueError(f"channel input dimension {chan.d_in} does not match {len(targets)} targets")
    out = apply_kraus_array(rho.data, chan.operators, targets, n)
    return DensityMatrix(out, check=False)


def compose_channels(outer: KrausChannel, inner: KrausChannel) -> KrausChannel:
    """Channel applying ``inner`` then ``outer``; operators ``O_j I_k`` with ``j`` slowest."""
    if inner.d_out != outer.d_in:
        raise ValueError(f"cannot compose: inner output {inner.d_out} != outer input {outer.d_in}")
    ops = np.matmul(outer.operators[:, None], inner.operators[None, :])
    return KrausChannel(ops.reshape(-1, outer.d_out, inner.d_in))


def compose_all(*channels: KrausChannel) -> KrausChannel:
    """Compose in time order: the first argument acts first."""
    out = channels[0]
    for chan in channels[1:]:
        out = compose_channels(chan, out)
    return out


def tensor_channels(a: KrausChannel, b: KrausChannel) -> KrausChannel:
    """Operators ``A_j (x) B_k`` with ``j`` slowest."""
    ops = np.einsum("iab,jcd->ijacbd", a.operators, b.operators)
    return KrausChannel(ops.reshape(a.n_operators * b.n_operators, a.d_out * b.d_out, a.d_in * b.d_in))


def tensor_power(chan: KrausChannel, n: int) -> KrausChannel:
    out = chan
    for _ in range(n - 1):
        out = tensor_channels(out, chan)
    return out


def conjugate_channel(chan: KrausChannel, u: UnitaryGate) -> KrausChannel:
    """``U . chan . U`` with the same ``U`` on both sides, e.g. a basis change by ``H``."""
    ops = np.matmul(np.matmul(u.matrix, chan.operators), u.matrix)
    return KrausChannel(ops)


def partial_trace(rho: DensityMatrix, keep: Sequence[int]) -> DensityMatrix:
    """Reduced state on ``keep``, with qubits ordered as listed."""
    n = rho.n_qubits
    keep = list(keep)
    if not keep:
        raise ValueError("keep must name at least one qubit")
    keep = list(_check_targets(keep, n))
    return DensityMatrix(partial_trace_array(rho.data, keep, n), check=False)


def partial_trace_array(rho: np.ndarray, keep: Sequence[int], n_qubits: int) -> np.ndarray:
    keep = list(keep)
    drop = [q for q in range(n_qubits) if q not in keep]
    order = keep + drop
    dk, dd = 2 ** len(keep), 2 ** len(drop)
    x = _permute_qubits(rho, order, n_qubits).reshape(dk, dd, dk, dd)
    return np.einsum("ajbj->ab", x)


def omega_vector(n_qubits: int) -> np.ndarray:
    """Maximally entangled ``|Omega> = 2**(-n/2) sum_j |j>|j>`` on ``2n`` qubits."""
    d = 2**n_qubits
    return np.eye(d).reshape(d * d) / np.sqrt(d)


def choi_state(chan: KrausChannel) -> ChoiState:
    if not chan.is_square:
        raise ValueError("Choi state is defined here for square channels only")
    d = chan.d_in
    omega = np.eye(d) / np.sqrt(d)  # |Omega> as a d x d matrix, row = system
    # (K x 1)|Omega> reshaped is K @ omega
    vecs = np.matmul(chan.operators, omega).reshape(chan.n_operators, d * d)
    return ChoiState(np.einsum("ka,kb->ab", vecs, vecs.conj()), check=False)


def fidelity_choi(chan: KrausChannel) -> float:
    if not chan.is_square:
        raise ValueError("channel fidelity needs a square channel")
    n = _n_qubits_of(chan.d_in)
    omega = omega_vector(n)
    return float(np.real(omega.conj() @ choi_state(chan).data @ omega))


def fidelity_trace(chan: KrausChannel) -> float:
    if not chan.is_square:
        raise ValueError("channel fidelity needs a square channel")
    traces = np.trace(chan.operators, axis1=1, axis2=2)
    return float(np.sum(np.abs(traces) ** 2) / chan.d_in**2)


def channel_fidelity(chan: KrausChannel, check: bool = True) -> float:
    """Overlap of the channel's Choi state with ``|Omega>``.

    With ``check`` the trace-sum form ``sum |tr K_j|**2 / d**2`` is evaluated as
    well and an ``ArithmeticError`` is raised if the two disagree.
    """
    f = fidelity_choi(chan)
    if check:
        g = fidelity_trace(chan)
        if abs(f - g) > FIDELITY_AGREEMENT_TOL:
            raise ArithmeticError(f"fidelity paths disagree: choi={f!r} trace={g!r}")
    return f


def choi_distance(a: KrausChannel | ChoiState, b: KrausChannel | ChoiState) -> float:
    """Trace-norm distance between the Choi states of two square channels."""
    ca, cb = (x if isinstance(x, ChoiState) else choi_state(x) for x in (a, b))
    diff = ca.data - cb.data
    return float(np.sum(np.abs(np.linalg.eigvalsh((diff + diff.conj().T) / 2))))


def validate_channel(chan: KrausChannel, tol: float = CHANNEL_TOL) -> ChannelReport:
    ops = chan.operators
    tp = np.einsum("kba,kbc->ac", ops.conj(), ops)
    tp_dev = float(np.max(np.abs(tp - np.eye(chan.d_in))))
    un = np.einsum("kab,kcb->ac", ops, ops.conj())
    un_dev = float(np.max(np.abs(un - np.eye(chan.d_out))))
    return ChannelReport(cptp=tp_dev <= tol, unital=un_dev <= tol,
                         max_violation=tp_dev, unital_violation=un_dev)


def state_fidelity(rho: DensityMatrix, psi) -> float:
    """``<psi|rho|psi>`` for a pure target state."""
    psi = np.asarray(psi, dtype=complex).reshape(-1)
    return float(np.real(psi.conj() @ rho.data @ psi))


def basis_states(n_qubits: int):
    return itertools.product((0, 1), repeat=n_qubits)
