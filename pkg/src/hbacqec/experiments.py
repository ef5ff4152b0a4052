"""Declarative parameter sweeps, multi-round protocol simulation and table output.

Every experiment is a pure function of its :class:`ExperimentSpec`; rows are
produced in nested-loop order over the swept parameters, outermost first, so
repeated runs give byte-identical files.
"""

from __future__ import annotations

import csv
import dataclasses
import enum
import io
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__, kernels, noise
from .codes import AncillaState, CodeKind, PipelineSpec, build_code, critical_rho00, pipeline_fidelity
from .hbac import PPAConfig, ppa_run, rank_by_polarization, refresh_metrics
from .qcore import (
    DensityMatrix,
    UnitaryGate,
    apply_kraus_array,
    partial_trace_array,
    permutation_matrix,
    tensor_power,
)

EXPERIMENTS = (
    "fidelity-curves",
    "critical-ancilla",
    "hbac-trace",
    "hbac-contour",
    "init-contour",
    "imperfect-gates",
    "imperfect-hbac",
    "multiround",
)

DEFAULT_GATE_FIDELITIES = (1.0, 0.999, 0.99, 0.95)


class SpecError(ValueError):
    """Raised for experiment specifications that cannot be run."""


# ---------------------------------------------------------------------------
# Tables
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ResultTable:
    columns: tuple[str, ...]
    rows: tuple[tuple[float, ...], ...]
    provenance: dict = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "columns", tuple(self.columns))
        rows = tuple(tuple(float(v) for v in r) for r in self.rows)
        for r in rows:
            if len(r) != len(self.columns):
                raise ValueError(f"row of length {len(r)} in a table with {len(self.columns)} columns")
            if not all(math.isfinite(v) for v in r):
                raise ValueError(f"non-finite value in row {r}")
        object.__setattr__(self, "rows", rows)

    def column(self, name: str) -> np.ndarray:
        k = self.columns.index(name)
        return np.array([r[k] for r in self.rows])

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write("# " + json.dumps(self.provenance, sort_keys=True) + "\n")
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(self.columns)
        for r in self.rows:
            writer.writerow([format(v, ".17g") for v in r])
        return buf.getvalue()

    def to_json(self) -> str:
        doc = {"provenance": self.provenance, "columns": list(self.columns),
               "rows": [list(r) for r in self.rows]}
        return json.dumps(doc, sort_keys=True, indent=1) + "\n"

    @classmethod
    def from_csv(cls, text: str) -> "ResultTable":
        lines = text.splitlines()
        provenance = {}
        if lines and lines[0].startswith("# "):
            provenance = json.loads(lines[0][2:])
            lines = lines[1:]
        reader = csv.reader(lines)
        columns = next(reader)
        return cls(tuple(columns), tuple(tuple(float(v) for v in r) for r in reader), provenance)

    @classmethod
    def from_json(cls, text: str) -> "ResultTable":
        doc = json.loads(text)
        return cls(tuple(doc["columns"]), tuple(tuple(r) for r in doc["rows"]), doc["provenance"])


def emit(table: ResultTable, fmt: str, path) -> Path:
    """Write ``table`` as ``csv`` or ``json``; I/O problems surface as ``OSError``."""
    if fmt == "csv":
        text = table.to_csv()
    elif fmt == "json":
        text = table.to_json()
    else:
        raise SpecError(f"unknown output format {fmt!r}")
    path = Path(path)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)
    return path


# ---------------------------------------------------------------------------
# Multi-round protocols
# ---------------------------------------------------------------------------


class Protocol(enum.Enum):
    FOUR_QUBIT = "four"
    SIX_QUBIT = "six"

    @classmethod
    def parse(cls, value) -> "Protocol":
        if isinstance(value, cls):
            return value
        key = str(value).lower()
        aliases = {"four_qubit": "four", "4": "four", "six_qubit": "six", "6": "six"}
        try:
            return cls(aliases.get(key, key))
        except ValueError:
            raise SpecError(f"unknown protocol {value!r}") from None


@dataclass(frozen=True)
class MultiRoundSpec:
    """Repeated encode / transmit / decode / refresh cycles.

    With ``ideal_ancilla`` set, initialization and refresh are replaced by
    resetting the ancilla pair to that state and the message starts pure;
    otherwise the register is cooled from the maximally mixed state and the
    message is rotated out of its (partially polarized) cooled state.
    """

    protocol: Protocol
    kind: CodeKind
    rounds: int
    p: float
    bath: float
    refresh_iterations: int = 3
    init_iterations: int | None = None
    c: float = 0.0
    theta: float = 0.0
    phi: float = 0.0
    dephase_during_refresh: bool = True
    ideal_ancilla: AncillaState | None = None

    def __post_init__(self):
        object.__setattr__(self, "protocol", Protocol.parse(self.protocol))
        object.__setattr__(self, "kind", CodeKind.parse(self.kind))
        if self.rounds < 1:
            raise SpecError("rounds must be at least 1")
        if self.refresh_iterations < 0 or (self.init_iterations is not None and self.init_iterations < 0):
            raise SpecError("iteration counts must be non-negative")
        if not (math.isfinite(self.theta) and math.isfinite(self.phi)):
            raise SpecError("preparation angles must be finite")
        try:
            noise._check_probability("p", self.p)
            noise._check_probability("bath polarization", self.bath)
            noise._check_probability("c", self.c, noise.MAX_GATE_ERROR)
        except ValueError as exc:
            raise SpecError(str(exc)) from None

    @property
    def n_qubits(self) -> int:
        return 4 if self.protocol is Protocol.FOUR_QUBIT else 6


def message_ket(theta: float, phi: float) -> np.ndarray:
    return np.array([math.cos(theta / 2), np.exp(1j * phi) * math.sin(theta / 2)])


def preparation_unitary(theta: float, phi: float) -> np.ndarray:
    """Unitary taking ``|0>`` to ``cos(theta/2)|0> + e^{i phi} sin(theta/2)|1>``."""
    c, s = math.cos(theta / 2), math.sin(theta / 2)
    return np.array([[c, -np.exp(-1j * phi) * s], [np.exp(1j * phi) * s, c]])


# Determinants below this are rounding noise on a pure state; left in, their
# square root would shift the fidelity by ~1e-9.
PURE_DET_TOL = 1e-15


def qubit_fidelity(rho: np.ndarray, sigma: np.ndarray) -> float:
    """Uhlmann fidelity of two single-qubit states."""
    det_r, det_s = (float(np.real(np.linalg.det(m))) for m in (rho, sigma))
    det_r = det_r if det_r > PURE_DET_TOL else 0.0
    det_s = det_s if det_s > PURE_DET_TOL else 0.0
    return float(np.real(np.trace(rho @ sigma))) + 2.0 * math.sqrt(det_r * det_s)


class _Register:
    """Mutable density matrix of the whole register during one simulation."""

    def __init__(self, rho: np.ndarray, n: int):
        self.rho = rho
        self.n = n

    def apply(self, ops: np.ndarray, targets) -> None:
        self.rho = apply_kraus_array(self.rho, ops, list(targets), self.n)

    def reduced(self, keep) -> np.ndarray:
        return partial_trace_array(self.rho, list(keep), self.n)

    def replace(self, qubits, state: np.ndarray) -> None:
        """Discard ``qubits`` and put them back in ``state`` (uncorrelated)."""
        qubits = list(qubits)
        rest = [q for q in range(self.n) if q not in qubits]
        joint = np.kron(self.reduced(rest), state) if rest else state
        order = list(np.argsort(rest + qubits))
        t = joint.reshape((2,) * (2 * self.n)).transpose(order + [self.n + q for q in order])
        self.rho = t.reshape(joint.shape)


def _refresh(reg: _Register, qubits, spec: MultiRoundSpec) -> None:
    """Partner-pairing on ``qubits`` (last one exchanged), leaving the rest untouched."""
    bath = np.diag(noise.qubit_thermal_diagonal(spec.bath)).astype(complex)
    for _ in range(spec.refresh_iterations):
        diag = np.real(np.diag(reg.reduced(qubits)))
        order = kernels.sort_order(diag)
        target = np.empty_like(order)
        target[order] = np.arange(order.size)
        u = UnitaryGate(permutation_matrix(target), check=False)
        reg.apply(noise.noisy_unitary(u, spec.c).operators, qubits)
        reg.replace([qubits[-1]], bath)


def multiround_sim(spec: MultiRoundSpec) -> ResultTable:
    """Per-round message fidelity for the four- or six-qubit protocol.

    Columns: ``round``; ``fidelity`` of the decoded message against the state
    actually prepared; ``target_fidelity`` against the ideal pure state;
    ``unprotected`` for an idle message exposed to the same transmissions;
    ``rho00_used`` of the pair that encoded the round; ``rho00_refreshed`` of
    that pair after its refresh.
    """
    n = spec.n_qubits
    code = build_code(spec.kind)
    enc = noise.noisy_unitary(code.encoder, spec.c).operators
    dec = noise.noisy_unitary(code.decoder, spec.c).operators
    transmit = tensor_power(noise.dephasing_channel(spec.p), 3).operators
    idle = noise.dephasing_channel(spec.p).operators
    prep = preparation_unitary(spec.theta, spec.phi)
    ket = message_ket(spec.theta, spec.phi)

    if spec.ideal_ancilla is not None:
        ranking = list(range(n))
        anc = spec.ideal_ancilla.diagonal()
        helper_diag = noise.qubit_thermal_diagonal(spec.bath)
        # layout (pair A, message, [pair B,] helper) following the cooled ranking
        if n == 4:
            diag = np.kron(np.kron(anc, [1.0, 0.0]), helper_diag)
        else:
            diag = np.kron(np.kron(np.kron(anc, [1.0, 0.0]), anc), helper_diag)
    else:
        iters = spec.refresh_iterations if spec.init_iterations is None else spec.init_iterations
        init = ppa_run(PPAConfig(n, spec.bath, iters), np.full(2**n, 1.0 / 2**n))
        diag = init.final
        ranking = rank_by_polarization(diag)
    pairs = [tuple(ranking[0:2])]
    message = ranking[2]
    if n == 6:
        pairs.append(tuple(ranking[3:5]))
    helper = ranking[-1]

    reg = _Register(np.diag(diag).astype(complex), n)
    reg.apply(prep[None], [message])
    prepared = reg.reduced([message])
    idle_msg = prepared.copy()
    ideal_pair = None if spec.ideal_ancilla is None else np.diag(spec.ideal_ancilla.diagonal()).astype(complex)

    rows = []
    for r in range(spec.rounds):
        pair = pairs[r % len(pairs)]
        code_qubits = [message, *pair]
        used = float(np.real(reg.reduced(pair)[0, 0]))
        reg.apply(enc, code_qubits)
        reg.apply(transmit, code_qubits)
        reg.apply(dec, code_qubits)
        idle_msg = apply_kraus_array(idle_msg, idle, [0], 1)
        out = reg.reduced([message])
        row = [r + 1, qubit_fidelity(prepared, out), float(np.real(ket.conj() @ out @ ket)),
               qubit_fidelity(prepared, idle_msg), used]
        if ideal_pair is not None:
            reg.replace(pair, ideal_pair)
        else:
            _refresh(reg, [*pair, helper], spec)
        row.append(float(np.real(reg.reduced(pair)[0, 0])))
        if spec.protocol is Protocol.FOUR_QUBIT and spec.dephase_during_refresh:
            reg.apply(idle, [message])
            idle_msg = apply_kraus_array(idle_msg, idle, [0], 1)
        rows.append(tuple(row))
    columns = ("round", "fidelity", "target_fidelity", "unprotected", "rho00_used", "rho00_refreshed")
    return ResultTable(columns, tuple(rows))


# ---------------------------------------------------------------------------
# Sweeps
# ---------------------------------------------------------------------------

_PER_EXPERIMENT_DEFAULTS = {
    "fidelity-curves": dict(p_min=0.0, p_max=0.5, p_steps=11),
    "critical-ancilla": dict(p_min=0.02, p_max=0.48, p_steps=24),
    "imperfect-gates": dict(p_min=0.02, p_max=0.48, p_steps=24),
    "hbac-trace": dict(iters=4, n_qubits=3, initial="mixed"),
    "hbac-contour": dict(iters=10, n_qubits=3, initial="bath"),
    "init-contour": dict(iters=10, n_qubits=4, initial="mixed"),
    "imperfect-hbac": dict(iters=6, eps=0.3, c_max=0.2, c_steps=21),
    "multiround": dict(iters=3, rounds=5, p_min=0.05, p_max=0.05, p_steps=1),
}


@dataclass(frozen=True)
class ExperimentSpec:
    """Everything needed to reproduce one table.

    Fields left as ``None`` take per-experiment defaults. ``eps`` fixes the
    bath polarization directly; otherwise it follows from ``temperature``
    through ``gamma`` and ``b0``.
    """

    experiment: str
    p_min: float | None = None
    p_max: float | None = None
    p_steps: int | None = None
    q: float = 0.4
    c: float = 0.0
    c_max: float | None = None
    c_steps: int | None = None
    temp_min: float = 1.0
    temp_max: float = 8.0
    temp_steps: int = 15
    temperature: float = 4.0
    eps: float | None = None
    iters: int | None = None
    init_iters: int | None = None
    rounds: int | None = None
    n_qubits: int | None = None
    initial: str | None = None
    protocol: str = "four"
    code: str = "optimal"
    theta: float = math.pi / 2
    phi: float = 0.0
    dephase_during_refresh: bool = True
    gate_fidelities: tuple[float, ...] = DEFAULT_GATE_FIDELITIES
    gamma: float = noise.GAMMA_ELECTRON
    b0: float = noise.DEFAULT_B0

    def __post_init__(self):
        if self.experiment not in EXPERIMENTS:
            raise SpecError(f"unknown experiment {self.experiment!r}")
        for key, value in _PER_EXPERIMENT_DEFAULTS.get(self.experiment, {}).items():
            if getattr(self, key) is None:
                object.__setattr__(self, key, value)
        if self.p_min is None:
            object.__setattr__(self, "p_min", 0.0)
            object.__setattr__(self, "p_max", 0.5)
            object.__setattr__(self, "p_steps", 11)
        object.__setattr__(self, "gate_fidelities", tuple(float(g) for g in self.gate_fidelities))
        self._validate()

    def _validate(self):
        def need(cond, msg):
            if not cond:
                raise SpecError(msg)

        need(self.p_steps is not None and self.p_steps >= 1, "p_steps must be at least 1")
        need(0.0 <= self.p_min <= self.p_max <= 1.0, "need 0 <= p_min <= p_max <= 1")
        if self.experiment in ("critical-ancilla", "imperfect-gates"):
            need(0.0 < self.p_min and self.p_max < 0.5, "critical ancilla needs 0 < p < 1/2")
        need(0.0 <= self.q <= 1.0, "q must lie in [0, 1]")
        need(0.0 <= self.c <= noise.MAX_GATE_ERROR, "c must lie in [0, 4/3]")
        if self.c_max is not None:
            need(0.0 <= self.c_max <= noise.MAX_GATE_ERROR, "c_max must lie in [0, 4/3]")
            need(self.c_steps is not None and self.c_steps >= 1, "c_steps must be at least 1")
        need(0.0 < self.temp_min <= self.temp_max, "need 0 < temp_min <= temp_max")
        need(self.temp_steps >= 1, "temp_steps must be at least 1")
        need(self.temperature > 0, "temperature must be positive")
        need(self.eps is None or 0.0 <= self.eps <= 1.0, "eps must lie in [0, 1]")
        need(self.iters is None or self.iters >= 0, "iters must be non-negative")
        if self.experiment in ("hbac-contour", "init-contour"):
            need(self.iters >= 1, "contours need at least one iteration")
        need(self.init_iters is None or self.init_iters >= 0, "init_iters must be non-negative")
        need(self.rounds is None or self.rounds >= 1, "rounds must be at least 1")
        need(self.n_qubits is None or 2 <= self.n_qubits <= 8, "n_qubits must lie in [2, 8]")
        if self.experiment in ("hbac-contour", "init-contour", "imperfect-hbac") and self.n_qubits is not None:
            need(self.n_qubits >= 3, f"{self.experiment} needs at least three qubits")
        need(self.initial in (None, "mixed", "bath"), "initial must be 'mixed' or 'bath'")
        need(self.gamma > 0 and self.b0 >= 0, "gamma must be positive and b0 non-negative")
        need(len(self.gate_fidelities) >= 1 and all(0 <= g <= 1 for g in self.gate_fidelities),
             "gate fidelities must lie in [0, 1]")
        need(math.isfinite(self.theta) and math.isfinite(self.phi), "angles must be finite")
        try:
            CodeKind.parse(self.code)
            Protocol.parse(self.protocol)
        except ValueError as exc:
            raise SpecError(str(exc)) from None

    def p_grid(self) -> np.ndarray:
        return np.linspace(self.p_min, self.p_max, self.p_steps)

    def temp_grid(self) -> np.ndarray:
        return np.linspace(self.temp_min, self.temp_max, self.temp_steps)

    def c_grid(self) -> np.ndarray:
        return np.linspace(0.0, self.c_max, self.c_steps)

    def polarization(self, temperature: float | None = None) -> float:
        if temperature is None and self.eps is not None:
            return self.eps
        t = self.temperature if temperature is None else temperature
        return noise.polarization_from_temperature(t, gamma=self.gamma, b0=self.b0)

    def parameters(self) -> dict:
        out = {}
        for f in dataclasses.fields(self):
            v = getattr(self, f.name)
            out[f.name] = list(v) if isinstance(v, tuple) else v
        return out


def _initial_diag(kind: str, eps: float, n: int) -> np.ndarray:
    if kind == "bath":
        return noise.thermal_diagonal(eps, n)
    return np.full(2**n, 1.0 / 2**n)


def _fidelity_curves(spec):
    cols = ("p", "unprotected", "traditional", "optimal")
    rows = []
    for p in spec.p_grid():
        ft = pipeline_fidelity(PipelineSpec(CodeKind.TRADITIONAL, p, q=spec.q, c=spec.c))
        fo = pipeline_fidelity(PipelineSpec(CodeKind.OPTIMAL, p, q=spec.q, c=spec.c))
        rows.append((p, 1 - p, ft, fo))
    return cols, rows


def _critical_ancilla(spec):
    cols = ("p", "rho00_traditional", "rho00_optimal", "attainable_traditional", "attainable_optimal")
    rows = []
    for p in spec.p_grid():
        t = critical_rho00(CodeKind.TRADITIONAL, p, spec.c)
        o = critical_rho00(CodeKind.OPTIMAL, p, spec.c)
        rows.append((p, t.rho00, o.rho00, t.attainable, o.attainable))
    return cols, rows


def _hbac_trace(spec):
    n = spec.n_qubits
    eps = spec.polarization()
    trace = ppa_run(PPAConfig(n, eps, spec.iters, c=spec.c), _initial_diag(spec.initial, eps, n))
    codes = {"compression": 1, "exchange": 2}
    ops = [0] + [codes[o] for o in trace.operations]
    cols = ("step", "operation") + tuple(f"pop_{j}" for j in range(2**n))
    rows = [(k, ops[k], *snap) for k, snap in enumerate(trace.snapshots)]
    return cols, rows


def _contour(spec, metric):
    n = spec.n_qubits
    cols = ("temperature", "polarization", "iterations", metric)
    rows = []
    for t in spec.temp_grid():
        eps = spec.polarization(t)
        trace = ppa_run(PPAConfig(n, eps, spec.iters, c=spec.c), _initial_diag(spec.initial, eps, n))
        for k in range(1, spec.iters + 1):
            rows.append((t, eps, k, getattr(refresh_metrics(trace.after_iteration(k)), metric)))
    return cols, rows


def _imperfect_gates(spec):
    kind = CodeKind.parse(spec.code)
    cols = ("gate_fidelity", "c", "p", "rho00_critical", "attainable")
    rows = []
    for g in sorted(spec.gate_fidelities):
        c = noise.gate_error_for_fidelity(g, 3)
        for p in spec.p_grid():
            res = critical_rho00(kind, p, c)
            rows.append((g, c, p, res.rho00, res.attainable))
    return cols, rows


def _imperfect_hbac(spec):
    eps = spec.polarization()
    cols = ("n_register", "c", "gate_fidelity", "qubit", "polarization", "rho00_pair")
    rows = []
    registers = (3, 4) if spec.n_qubits is None else (spec.n_qubits,)
    for n in registers:
        # a 3-qubit register is refreshed from the bath; a 4-qubit one is initialized from scratch
        initial = spec.initial or ("bath" if n == 3 else "mixed")
        for c in spec.c_grid():
            trace = ppa_run(PPAConfig(n, eps, spec.iters, c=c), _initial_diag(initial, eps, n))
            m = refresh_metrics(trace.final)
            for k, pol in enumerate(m.polarizations):
                rows.append((n, c, noise.gate_fidelity(c, n), k, pol, m.rho00_pair))
    return cols, rows


def multiround_spec(spec: ExperimentSpec) -> MultiRoundSpec:
    return MultiRoundSpec(
        protocol=spec.protocol, kind=spec.code, rounds=spec.rounds, p=spec.p_min,
        bath=spec.polarization(), refresh_iterations=spec.iters, init_iterations=spec.init_iters,
        c=spec.c, theta=spec.theta, phi=spec.phi, dephase_during_refresh=spec.dephase_during_refresh,
    )


def _multiround(spec):
    cols = None
    rows = []
    for p in spec.p_grid():
        table = multiround_sim(dataclasses.replace(multiround_spec(spec), p=float(p)))
        cols = ("p",) + table.columns
        rows.extend((p, *r) for r in table.rows)
    return cols, rows


_RUNNERS = {
    "fidelity-curves": _fidelity_curves,
    "critical-ancilla": _critical_ancilla,
    "hbac-trace": _hbac_trace,
    "hbac-contour": lambda s: _contour(s, "rho00_pair"),
    "init-contour": lambda s: _contour(s, "message_pop"),
    "imperfect-gates": _imperfect_gates,
    "imperfect-hbac": _imperfect_hbac,
    "multiround": _multiround,
}


def run_experiment(spec: ExperimentSpec) -> ResultTable:
    cols, rows = _RUNNERS[spec.experiment](spec)
    provenance = {
        "experiment": spec.experiment,
        "parameters": spec.parameters(),
        "engine": f"hbacqec {__version__}",
        "kernel_backend": kernels.BACKEND,
    }
    return ResultTable(cols, tuple(rows), provenance)
