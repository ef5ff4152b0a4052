"""Independent reference computations used only by the tests.

Nothing here imports the package under test: gates are built from explicit
bit manipulation, channels are applied by explicit full-register matrices and
the cooling loop uses plain Python lists.
"""

import itertools
import math

import numpy as np

I2 = np.eye(2)
X = np.array([[0, 1], [1, 0]], dtype=complex)
Y = np.array([[0, -1j], [1j, 0]])
Z = np.diag([1.0, -1.0]).astype(complex)
H = np.array([[1, 1], [1, -1]]) / math.sqrt(2)


def bits(i, n):
    return [(i >> (n - 1 - k)) & 1 for k in range(n)]


def from_bits(b):
    out = 0
    for x in b:
        out = 2 * out + x
    return out


def full_operator(op, targets, n):
    """Matrix of ``op`` on ``targets`` of an n-qubit register, by basis enumeration."""
    k = len(targets)
    d = 2**n
    out = np.zeros((d, d), dtype=complex)
    for col in range(d):
        cb = bits(col, n)
        sub_in = from_bits([cb[t] for t in targets])
        for sub_out in range(2**k):
            amp = op[sub_out, sub_in]
            if amp == 0:
                continue
            rb = list(cb)
            for t, v in zip(targets, bits(sub_out, k)):
                rb[t] = v
            out[from_bits(rb), col] += amp
    return out


def apply(rho, ops, targets, n):
    out = np.zeros_like(rho, dtype=complex)
    for k in ops:
        f = full_operator(k, targets, n)
        out += f @ rho @ f.conj().T
    return out


def classical_gate(fn, n):
    d = 2**n
    u = np.zeros((d, d))
    for i in range(d):
        u[from_bits(fn(bits(i, n))), i] = 1
    return u


def cnot(c, t, n=3):
    def f(b):
        b = list(b)
        if b[c]:
            b[t] ^= 1
        return b
    return classical_gate(f, n)


def toffoli(c1, c2, t, n=3):
    def f(b):
        b = list(b)
        if b[c1] and b[c2]:
            b[t] ^= 1
        return b
    return classical_gate(f, n)


def code_unitaries(kind):
    h3 = np.kron(np.kron(H, H), H)
    enc = h3 @ cnot(0, 2) @ cnot(0, 1)
    if kind == "optimal":
        enc = enc @ toffoli(1, 2, 0)
    dec = toffoli(1, 2, 0) @ cnot(0, 2) @ cnot(0, 1) @ h3
    return enc, dec


def pipeline_fidelity(kind, p, anc, c=0.0):
    """Sum of |tr K|^2 / 4 over the explicitly enumerated composite Kraus set."""
    enc, dec = code_unitaries(kind)
    pauli = [I2, X, Y, Z]
    if c:
        wts = [1 - 3 * c / 4, c / 4, c / 4, c / 4]
        dep = [math.sqrt(wts[a] * wts[b] * wts[g]) * np.kron(np.kron(pauli[a], pauli[b]), pauli[g])
               for a, b, g in itertools.product(range(4), repeat=3)]
    else:
        dep = [np.eye(8)]
    errs = []
    for e in itertools.product([0, 1], repeat=3):
        w = np.prod([p if x else 1 - p for x in e])
        m = np.eye(1)
        for x in e:
            m = np.kron(m, Z if x else I2)
        errs.append(math.sqrt(w) * m)
    total = 0.0
    for a in range(4):
        col = np.zeros((4, 1))
        col[a] = math.sqrt(anc[a])
        append = np.kron(I2, col)
        for d1 in dep:
            e_op = d1 @ enc @ append
            for t in errs:
                te = t @ e_op
                for d2 in dep:
                    full = d2 @ dec @ te
                    for b in range(4):
                        row = np.zeros((1, 4))
                        row[0, b] = 1
                        total += abs(np.trace(np.kron(I2, row) @ full)) ** 2 / 4
    return total


def mixing_ancilla(q):
    a, b = 1 - q / 2, q / 2
    return [a * a, a * b, b * a, b * b]


def ppa_brute(diag, n, iterations, eps, c=0.0, target=None):
    """Plain-list partner pairing; returns the list of snapshots."""
    target = n - 1 if target is None else target
    d = [float(x) for x in diag]
    snaps = [list(d)]
    bit = 1 << (n - 1 - target)
    up, down = (1 + eps) / 2, (1 - eps) / 2
    for _ in range(iterations):
        order = sorted(range(len(d)), key=lambda i: (-d[i], i))
        d = [d[i] for i in order]
        if c:
            for k in range(n):
                m = 1 << (n - 1 - k)
                d = [(1 - c / 2) * d[i] + (c / 2) * d[i ^ m] for i in range(len(d))]
        snaps.append(list(d))
        new = [0.0] * len(d)
        for i in range(len(d)):
            if i & bit:
                continue
            s = d[i] + d[i | bit]
            new[i], new[i | bit] = s * up, s * down
        d = new
        snaps.append(list(d))
    return snaps


def pair00(diag, n):
    """Joint |00> probability of qubits 0 and 1."""
    return sum(v for i, v in enumerate(diag) if not (i >> (n - 1)) & 1 and not (i >> (n - 2)) & 1)


def ppa3_limit(eps):
    """Closed-form converged rho00 of the two coldest qubits of a 3-qubit PPA register."""
    x = (1 - eps) / (1 + eps)
    return (1 - x) / (1 - x**4)


def thermal(eps, n):
    d = np.array([1.0])
    for _ in range(n):
        d = np.kron(d, [(1 + eps) / 2, (1 - eps) / 2])
    return d
