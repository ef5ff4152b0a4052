"""Noise channels and thermal-state constructors."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .qcore import (
    PAULIS,
    DensityMatrix,
    KrausChannel,
    UnitaryGate,
    compose_channels,
    kron_all,
    tensor_power,
)

HBAR = 1.054571817e-34  # J s
K_B = 1.380649e-23  # J / K
GAMMA_ELECTRON = 1.76085963e11  # rad / (s T)
# Field chosen so that epsilon = sqrt(2) - 1 corresponds to 3.4 K with GAMMA_ELECTRON.
DEFAULT_B0 = 1.114  # T

MAX_GATE_ERROR = 4.0 / 3.0


def _check_probability(name: str, value: float, upper: float = 1.0) -> float:
    value = float(value)
    if not (0.0 <= value <= upper) or math.isnan(value):
        raise ValueError(f"{name} must lie in [0, {upper:g}], got {value!r}")
    return value


def dephasing_channel(p: float) -> KrausChannel:
    """``{sqrt(1-p) 1, sqrt(p) Z}``."""
    p = _check_probability("p", p)
    return KrausChannel(np.stack([math.sqrt(1 - p) * PAULIS["I"], math.sqrt(p) * PAULIS["Z"]]))


def bit_flip_channel(p: float) -> KrausChannel:
    """``{sqrt(1-p) 1, sqrt(p) X}``."""
    p = _check_probability("p", p)
    return KrausChannel(np.stack([math.sqrt(1 - p) * PAULIS["I"], math.sqrt(p) * PAULIS["X"]]))


def mixing_channel(q: float) -> KrausChannel:
    """Ancilla degradation ``{sqrt(1-q/2) 1, sqrt(q/2) X}``.

    Acting on ``|0>`` it yields ``diag(1 - q/2, q/2)``, i.e. polarization ``1 - q``.
    """
    q = _check_probability("q", q)
    return KrausChannel(np.stack([math.sqrt(1 - q / 2) * PAULIS["I"], math.sqrt(q / 2) * PAULIS["X"]]))


def depolarizing_channel(c: float) -> KrausChannel:
    """Single-qubit ``{sqrt(1-3c/4) 1, sqrt(c/4) X, sqrt(c/4) Y, sqrt(c/4) Z}``."""
    c = _check_probability("c", c, MAX_GATE_ERROR)
    w = math.sqrt(c / 4)
    return KrausChannel(np.stack([
        math.sqrt(1 - 3 * c / 4) * PAULIS["I"],
        w * PAULIS["X"], w * PAULIS["Y"], w * PAULIS["Z"],
    ]))


def depolarizing_register(c: float, n_qubits: int) -> KrausChannel:
    """Independent depolarization of every qubit; ``4**n`` operators."""
    return tensor_power(depolarizing_channel(c), n_qubits)


def noisy_unitary(u: UnitaryGate, c: float) -> KrausChannel:
    """``u`` followed by depolarization with parameter ``c`` on each of its qubits.

    ``c = 0`` returns the bare unitary as a one-operator channel.
    """
    c = _check_probability("c", c, MAX_GATE_ERROR)
    if c == 0.0:
        return u.as_channel()
    return compose_channels(depolarizing_register(c, u.n_qubits), u.as_channel())


def gate_fidelity(c: float, n: int = 3) -> float:
    """Channel fidelity of the ``n``-qubit depolarizing wrapper, ``(1 - 3c/4)**n``."""
    c = _check_probability("c", c, MAX_GATE_ERROR)
    return (1.0 - 0.75 * c) ** n


def gate_error_for_fidelity(fidelity: float, n: int = 3) -> float:
    """Inverse of :func:`gate_fidelity`."""
    fidelity = _check_probability("fidelity", fidelity)
    return 4.0 / 3.0 * (1.0 - fidelity ** (1.0 / n))


@dataclass(frozen=True)
class ThermalSpec:
    """Bath parameters for ``epsilon = tanh(hbar gamma B0 / (k_B T))``.

    The formula is used without the factor 1/2 of the spin-1/2 Boltzmann
    ratio; ``b0`` is calibrated against that convention.
    """

    temperature: float
    gamma: float = GAMMA_ELECTRON
    b0: float = DEFAULT_B0
    hbar: float = HBAR
    k_b: float = K_B

    def __post_init__(self):
        if not self.temperature > 0:
            raise ValueError(f"temperature must be positive, got {self.temperature!r}")
        if not self.gamma > 0:
            raise ValueError(f"gamma must be positive, got {self.gamma!r}")
        if not self.b0 >= 0:
            raise ValueError(f"b0 must be non-negative, got {self.b0!r}")

    @property
    def energy_ratio(self) -> float:
        return self.hbar * self.gamma * self.b0 / (self.k_b * self.temperature)


def polarization_from_temperature(spec: ThermalSpec | float, gamma: float = GAMMA_ELECTRON,
                                  b0: float = DEFAULT_B0) -> float:
    if not isinstance(spec, ThermalSpec):
        spec = ThermalSpec(float(spec), gamma=gamma, b0=b0)
    return math.tanh(spec.energy_ratio)


def temperature_from_polarization(eps: float, gamma: float = GAMMA_ELECTRON, b0: float = DEFAULT_B0,
                                  hbar: float = HBAR, k_b: float = K_B) -> float:
    eps = float(eps)
    if not 0.0 < eps < 1.0:
        raise ValueError(f"polarization {eps!r} has no finite positive temperature")
    return hbar * gamma * b0 / (k_b * math.atanh(eps))


def qubit_thermal_diagonal(eps: float) -> np.ndarray:
    eps = _check_probability("polarization", eps)
    return np.array([(1 + eps) / 2, (1 - eps) / 2])


def thermal_diagonal(eps: float, n: int) -> np.ndarray:
    single = qubit_thermal_diagonal(eps)
    out = np.ones(1)
    for _ in range(n):
        out = np.kron(out, single)
    return out


def thermal_state(eps: float, n: int) -> DensityMatrix:
    """``n``-fold product of ``diag((1+eps)/2, (1-eps)/2)``."""
    return DensityMatrix.from_diagonal(thermal_diagonal(eps, n), check=False)


def pauli_string(label: str) -> UnitaryGate:
    return UnitaryGate(kron_all(PAULIS[ch] for ch in label.upper()), name=label, check=False)
