"""Three-qubit phase-error-correcting codes with thermally mixed ancillas.

The message sits on qubit 0 and the two ancillas on qubits 1 and 2. A code
is assessed through the single-qubit composite channel

    append ancillas -> mix ancillas -> encode -> dephase x3 -> decode -> discard ancillas

whose channel fidelity is compared against ``1 - p``, the fidelity of leaving
the message unprotected.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy.optimize import bisect

from . import noise
from .qcore import (
    ChoiState,
    DensityMatrix,
    KrausChannel,
    UnitaryGate,
    apply_kraus_array,
    compose_all,
    embed_operator,
    omega_vector,
    partial_trace_array,
    standard_gate,
    tensor_power,
)


class CodeKind(enum.Enum):
    TRADITIONAL = "traditional"
    OPTIMAL = "optimal"

    @classmethod
    def parse(cls, value) -> "CodeKind":
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).lower())
        except ValueError:
            raise ValueError(f"unknown code kind {value!r}") from None


@dataclass(frozen=True)
class AncillaState:
    """Diagonal two-qubit ancilla state, populations of |00>, |01>, |10>, |11>."""

    rho00: float
    rho01: float
    rho10: float
    rho11: float

    def __post_init__(self):
        vals = self.diagonal()
        if np.any(vals < 0) or not np.all(np.isfinite(vals)):
            raise ValueError(f"ancilla populations must be non-negative, got {vals.tolist()}")
        if abs(vals.sum() - 1.0) > 1e-12:
            raise ValueError(f"ancilla populations sum to {vals.sum()!r}, not 1")

    @classmethod
    def from_mixing(cls, q: float) -> "AncillaState":
        """State produced by the mixing channel acting on each qubit of ``|00>``."""
        q = noise._check_probability("q", q)
        a, b = 1 - q / 2, q / 2
        return cls(a * a, a * b, b * a, b * b)

    @classmethod
    def from_polarizations(cls, eps0: float, eps1: float) -> "AncillaState":
        d0 = noise.qubit_thermal_diagonal(eps0)
        d1 = noise.qubit_thermal_diagonal(eps1)
        return cls.from_diagonal(np.kron(d0, d1))

    @classmethod
    def from_diagonal(cls, probs) -> "AncillaState":
        p = [float(x) for x in np.asarray(probs, dtype=float).reshape(4)]
        return cls(*p)

    @classmethod
    def pure(cls) -> "AncillaState":
        return cls(1.0, 0.0, 0.0, 0.0)

    def diagonal(self) -> np.ndarray:
        return np.array([self.rho00, self.rho01, self.rho10, self.rho11], dtype=float)

    def density_matrix(self) -> DensityMatrix:
        return DensityMatrix.from_diagonal(self.diagonal(), check=False)


class Gate(NamedTuple):
    gate: UnitaryGate
    targets: tuple[int, ...]


class Code(NamedTuple):
    encoder: UnitaryGate
    decoder: UnitaryGate
    encoder_gates: tuple[Gate, ...]
    decoder_gates: tuple[Gate, ...]


def _elementary_gates(kind: CodeKind) -> tuple[list[Gate], list[Gate]]:
    h = standard_gate("H")
    cnot = standard_gate("CNOT")
    tof = standard_gate("TOFFOLI")
    hadamards = [Gate(h, (q,)) for q in range(3)]
    enc = [Gate(cnot, (0, 1)), Gate(cnot, (0, 2))] + hadamards
    if kind is CodeKind.OPTIMAL:
        # pre-flip the message when both ancillas read 1, undoing the false correction
        enc = [Gate(tof, (1, 2, 0))] + enc
    dec = hadamards + [Gate(cnot, (0, 1)), Gate(cnot, (0, 2)), Gate(tof, (1, 2, 0))]
    return enc, dec


def _product(gates) -> UnitaryGate:
    u = UnitaryGate(np.eye(8), check=False)
    for g in gates:
        u = g.gate.on(g.targets, 3) @ u
    return u


def build_code(kind: CodeKind | str) -> Code:
    """Encoder and decoder unitaries (and their elementary gates, in time order)."""
    kind = CodeKind.parse(kind)
    enc, dec = _elementary_gates(kind)
    return Code(_product(enc), _product(dec), tuple(enc), tuple(dec))


@dataclass(frozen=True)
class PipelineSpec:
    """Parameters of the composite single-qubit channel.

    Exactly one of ``ancilla`` and ``q`` is used: an explicit ``ancilla``
    bypasses the mixing channel, otherwise both ancillas pass through
    ``mixing_channel(q)`` starting from ``|00>``.
    """

    kind: CodeKind
    p: float
    q: float | None = None
    ancilla: AncillaState | None = None
    c: float = 0.0
    decompose_gate_noise: bool = False

    def __post_init__(self):
        object.__setattr__(self, "kind", CodeKind.parse(self.kind))
        noise._check_probability("p", self.p)
        noise._check_probability("c", self.c, noise.MAX_GATE_ERROR)
        if self.ancilla is None and self.q is None:
            raise ValueError("either q or ancilla must be given")
        if self.ancilla is not None and self.q is not None:
            raise ValueError("give q or ancilla, not both")
        if self.q is not None:
            noise._check_probability("q", self.q)

    def ancilla_state(self) -> AncillaState:
        return self.ancilla if self.ancilla is not None else AncillaState.from_mixing(self.q)


def _append_ancilla_channel(spec: PipelineSpec) -> KrausChannel:
    """1 -> 3 qubit channel preparing the ancillas next to the message."""
    eye = np.eye(2)
    if spec.ancilla is None:
        mix = noise.mixing_channel(spec.q).operators
        kets = [np.kron(mix[a][:, [0]], mix[b][:, [0]]) for a in range(2) for b in range(2)]
    else:
        kets = []
        for idx, w in enumerate(spec.ancilla.diagonal()):
            ket = np.zeros((4, 1))
            ket[idx] = math.sqrt(w)
            kets.append(ket)
    return KrausChannel(np.stack([np.kron(eye, k) for k in kets]))


def _discard_ancilla_channel() -> KrausChannel:
    eye = np.eye(2)
    bras = np.eye(4)[:, None, :]
    return KrausChannel(np.stack([np.kron(eye, b) for b in bras]))


def _gate_stage(gates, whole: UnitaryGate, c: float, decompose: bool) -> list[KrausChannel]:
    if c == 0.0:
        return [whole.as_channel()]
    if not decompose:
        return [noise.noisy_unitary(whole, c)]
    return [_noisy_local(g, c) for g in gates]


def _noisy_local(g: Gate, c: float) -> KrausChannel:
    """Elementary gate followed by depolarization of only the qubits it touches."""
    local = noise.noisy_unitary(g.gate, c)
    return KrausChannel(np.stack([embed_operator(k, g.targets, 3) for k in local.operators]))


def _stages(spec: PipelineSpec) -> list[KrausChannel]:
    code = build_code(spec.kind)
    return (
        _gate_stage(code.encoder_gates, code.encoder, spec.c, spec.decompose_gate_noise)
        + [tensor_power(noise.dephasing_channel(spec.p), 3)]
        + _gate_stage(code.decoder_gates, code.decoder, spec.c, spec.decompose_gate_noise)
    )


def build_pipeline(spec: PipelineSpec) -> KrausChannel:
    """Composite channel as a square 1-qubit Kraus set.

    The ancilla-appending isometry and the final partial trace are folded into
    the operators, so each returned operator is 2 x 2. With per-gate noise the
    exact composition is too large, and the Kraus set is instead read off the
    eigen-decomposition of the Choi state.
    """
    if spec.decompose_gate_noise and spec.c > 0:
        return kraus_from_choi(pipeline_choi(spec))
    return compose_all(_append_ancilla_channel(spec), *_stages(spec), _discard_ancilla_channel())


def kraus_from_choi(choi: ChoiState) -> KrausChannel:
    d = int(round(math.sqrt(choi.dim)))
    w, v = np.linalg.eigh(choi.data)
    ops = [math.sqrt(lam * d) * v[:, j].reshape(d, d) for j, lam in enumerate(w) if lam > 1e-15]
    return KrausChannel(np.stack(ops))


def pipeline_choi(spec: PipelineSpec) -> ChoiState:
    """Choi state of the composite, obtained by pushing ``|Omega><Omega|`` through it.

    Register layout during propagation: message 0, ancillas 1-2, reference 3.
    """
    omega = omega_vector(1)
    bell = np.outer(omega, omega.conj())
    anc = np.diag(spec.ancilla_state().diagonal()).astype(complex)
    # kron order (message, reference, anc1, anc2) -> reorder to (message, anc1, anc2, reference)
    rho = np.kron(bell, anc).reshape((2,) * 8).transpose(0, 2, 3, 1, 4, 6, 7, 5).reshape(16, 16)
    for stage in _stages(spec):
        rho = apply_kraus_array(rho, stage.operators, (0, 1, 2), 4)
    return ChoiState(partial_trace_array(rho, [0, 3], 4), check=False)


def pipeline_fidelity(spec: PipelineSpec) -> float:
    """Channel fidelity of the composite via state propagation (no Kraus expansion)."""
    omega = omega_vector(1)
    return float(np.real(omega.conj() @ pipeline_choi(spec).data @ omega))


# ---------------------------------------------------------------------------
# Closed forms
# ---------------------------------------------------------------------------


def traditional_polynomial(p: float, q: float) -> float:
    return ((1 - q * q / 4) - (2 * q - 1.5 * q * q) * p
            - (3 - 6 * q + 3 * q * q) * p * p + (2 - 4 * q + 2 * q * q) * p**3)


def optimal_polynomial_printed(p: float, q: float) -> float:
    """The optimal-code polynomial in ``(p, q)`` with the coefficients as published.

    Its ``p**2`` coefficient ``3 - 6q + 3q**2`` does not agree with the
    ancilla-population form; see :func:`optimal_polynomial_consistent`.
    """
    return (1 - (2 * q - q * q / 2) * p
            - (3 - 6 * q + 3 * q * q) * p * p + (2 - 4 * q + q * q) * p**3)


def optimal_polynomial_consistent(p: float, q: float) -> float:
    """Expansion of :func:`optimal_from_rho` with ``rho00 = (1 - q/2)**2``."""
    return (1 - (2 * q - q * q / 2) * p
            - (3 - 6 * q + 1.5 * q * q) * p * p + (2 - 4 * q + q * q) * p**3)


def traditional_from_rho(p: float, anc: AncillaState) -> float:
    return (anc.rho11 * (2 * p - 1)
            + (1 - p) * (1 + (p - 2 * p * p) * (1 - 2 * (anc.rho10 + anc.rho01))))


def optimal_from_rho(p: float, rho00: float) -> float:
    return (1 - p) * (1 + (p - 2 * p * p) * (2 * rho00 - 1))


def closed_form_fidelity(kind: CodeKind | str, p: float, anc: AncillaState | float) -> dict[str, float]:
    """All applicable closed forms, keyed by name.

    A float ``anc`` is the mixing parameter ``q``; the polynomial forms are
    then included alongside the population forms of the induced ancilla.
    """
    kind = CodeKind.parse(kind)
    out: dict[str, float] = {}
    if isinstance(anc, AncillaState):
        state = anc
    else:
        q = noise._check_probability("q", anc)
        state = AncillaState.from_mixing(q)
        if kind is CodeKind.TRADITIONAL:
            out["polynomial"] = traditional_polynomial(p, q)
        else:
            out["polynomial_printed"] = optimal_polynomial_printed(p, q)
            out["polynomial_consistent"] = optimal_polynomial_consistent(p, q)
    if kind is CodeKind.TRADITIONAL:
        out["from_rho"] = traditional_from_rho(p, state)
    else:
        out["from_rho"] = optimal_from_rho(p, state.rho00)
    return out


# ---------------------------------------------------------------------------
# Usefulness threshold
# ---------------------------------------------------------------------------


class CriticalAncilla(NamedTuple):
    rho00: float
    q: float
    attainable: bool


def critical_rho00(kind: CodeKind | str, p: float, c: float = 0.0, xtol: float = 1e-13,
                   decompose_gate_noise: bool = False) -> CriticalAncilla:
    """Smallest thermal ``rho00 = (1 - q/2)**2`` at which the code matches ``1 - p``.

    Bisects over the mixing parameter ``q`` against the full pipeline. If even
    pure ancillas (``q = 0``) fall short the result is flagged unattainable
    and reports ``rho00 = 1``.
    """
    kind = CodeKind.parse(kind)
    if not 0.0 < p < 0.5:
        raise ValueError(f"critical ancilla is defined for 0 < p < 1/2, got {p!r}")

    def excess(q):
        spec = PipelineSpec(kind, p, q=q, c=c, decompose_gate_noise=decompose_gate_noise)
        return pipeline_fidelity(spec) - (1 - p)

    if excess(0.0) < 0:
        return CriticalAncilla(1.0, 0.0, False)
    if excess(1.0) >= 0:
        return CriticalAncilla(0.25, 1.0, True)
    q = bisect(excess, 0.0, 1.0, xtol=xtol, rtol=4 * np.finfo(float).eps, maxiter=200)
    return CriticalAncilla((1 - q / 2) ** 2, q, True)


def optimal_polynomial_discrepancy(p_values, q_values) -> list[tuple[float, ...]]:
    """Rows ``(p, q, simulated, from_rho, printed, consistent)`` for the optimal code."""
    rows = []
    for p in p_values:
        for q in q_values:
            sim = pipeline_fidelity(PipelineSpec(CodeKind.OPTIMAL, p, q=q))
            rows.append((p, q, sim, optimal_from_rho(p, (1 - q / 2) ** 2),
                         optimal_polynomial_printed(p, q), optimal_polynomial_consistent(p, q)))
    return rows
