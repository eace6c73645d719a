"""Independent reference implementations used as test oracles.

Deliberately brute force: explicit modular indexing and dense linear
algebra, sharing no code path with the library.
"""

import numpy as np


def conv_dense(x, taps):
    """Circular convolution by explicit modular indexing."""
    h, w = x.shape
    out = np.zeros_like(x)
    for r in range(h):
        for c in range(w):
            acc = 0.0
            for dy, dx, wgt in taps:
                acc += wgt * x[(r - dy) % h, (c - dx) % w]
            out[r, c] = acc
    return out


def circulant_matrix(taps, shape):
    """Dense matrix of the circular convolution operator."""
    h, w = shape
    mat = np.zeros((h * w, h * w))
    for r in range(h):
        for c in range(w):
            for dy, dx, wgt in taps:
                mat[r * w + c, ((r - dy) % h) * w + ((c - dx) % w)] += wgt
    return mat


def objective_dense(t, lpe, bank, weights, lam):
    val = 0.5 * lam * float(np.sum((t - lpe) ** 2))
    for kernel, wmap in zip(bank.kernels, weights):
        val += float(np.sum(np.abs(wmap * conv_dense(t, kernel.taps))))
    return val


def augmented_dense(t, u_list, lpe, bank, weights, lam, beta):
    val = 0.5 * lam * float(np.sum((t - lpe) ** 2))
    for kernel, wmap, u in zip(bank.kernels, weights, u_list):
        d = conv_dense(t, kernel.taps)
        val += float(np.sum(np.abs(wmap * u))) + 0.5 * beta * float(np.sum((d - u) ** 2))
    return val
