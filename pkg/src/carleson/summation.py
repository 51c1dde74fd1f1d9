"""Deterministic pairwise summation.

The reduction tree depends only on the array length, so results are
reproducible regardless of BLAS threading or numpy's internal blocking.
"""

import numpy as np


def pairwise_sum(values, axis=-1):
    """Sum ``values`` along ``axis`` with a fixed binary reduction tree.

    Works for real and complex input; ``inf`` propagates as usual.
    Empty input sums to 0.
    """
    x = np.asarray(values)
    if x.dtype.kind not in "fc":
        x = x.astype(float)
    x = np.moveaxis(x, axis, -1)
    if x.shape[-1] == 0:
        return x.sum(axis=-1)
    while x.shape[-1] > 1:
        if x.shape[-1] % 2:
            pad = np.zeros(x.shape[:-1] + (1,), dtype=x.dtype)
            x = np.concatenate([x, pad], axis=-1)
        x = x[..., 0::2] + x[..., 1::2]
    out = x[..., 0]
    return out[()] if out.ndim == 0 else out


def prefix_sums(values):
    """Inclusive running sums, accumulated left to right."""
    x = np.asarray(values, dtype=float)
    out = np.empty_like(x)
    acc = 0.0
    for i, t in enumerate(x):
        acc += t
        out[i] = acc
    return out


def suffix_sums(values):
    """``out[i] = sum(values[i+1:])``, accumulated right to left."""
    x = np.asarray(values, dtype=float)
    out = np.empty_like(x)
    acc = 0.0
    for i in range(len(x) - 1, -1, -1):
        out[i] = acc
        acc += x[i]
    return out


def safe_product(a, b):
    """Elementwise product with the measure-theoretic convention 0 * inf = 0."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    with np.errstate(invalid="ignore"):
        out = a * b
    return np.where((a == 0) | (b == 0), 0.0, out)
