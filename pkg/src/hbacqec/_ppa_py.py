"""Pure NumPy implementation of the diagonal partner-pairing kernels.

Mirrors ``_ppa_ext.pyx`` operation for operation so both backends perform the
same floating-point arithmetic.
"""

import numpy as np

BACKEND = "python"
# Populations closer than this count as tied. Exchange recomputes tied entries
# along different rounding paths, and a strict sort would swap them on 1-ulp noise.
TIE_TOL = 1e-14


def sort_order(diag):
    """Indices giving ``diag`` in non-increasing order; ties keep index order.

    Insertion sort in which an entry only moves ahead of one that is smaller
    by more than ``TIE_TOL``.
    """
    d = [float(x) for x in np.asarray(diag, dtype=np.float64)]
    order = list(range(len(d)))
    for i in range(1, len(d)):
        key = order[i]
        j = i - 1
        while j >= 0 and d[order[j]] + TIE_TOL < d[key]:
            order[j + 1] = order[j]
            j -= 1
        order[j + 1] = key
    return np.array(order, dtype=np.int64)


def exchange_diag(diag, n_qubits, target, eps):
    diag = np.asarray(diag, dtype=np.float64)
    bath = np.array([(1.0 + eps) / 2.0, (1.0 - eps) / 2.0])
    t = diag.reshape(2**target, 2, 2 ** (n_qubits - 1 - target))
    marginal = t[:, 0, :] + t[:, 1, :]
    return (marginal[:, None, :] * bath[None, :, None]).reshape(-1)


def depolarize_diag(diag, n_qubits, c):
    out = np.array(diag, dtype=np.float64)
    keep = 1.0 - c / 2.0
    flip = c / 2.0
    idx = np.arange(out.size)
    for k in range(n_qubits):
        mask = 1 << (n_qubits - 1 - k)
        out = keep * out + flip * out[idx ^ mask]
    return out


def ppa_diag(diag, n_qubits, iterations, eps, target, c, exchange_first):
    d = np.array(diag, dtype=np.float64)
    size = d.size
    snaps = np.empty((2 * iterations + 1, size))
    orders = np.empty((iterations, size), dtype=np.int64)
    snaps[0] = d
    row = 1
    for it in range(iterations):
        if exchange_first:
            d = exchange_diag(d, n_qubits, target, eps)
            snaps[row] = d
            row += 1
        order = sort_order(d)
        orders[it] = order
        d = d[order]
        if c != 0.0:
            d = depolarize_diag(d, n_qubits, c)
        snaps[row] = d
        row += 1
        if not exchange_first:
            d = exchange_diag(d, n_qubits, target, eps)
            snaps[row] = d
            row += 1
    return snaps, orders
