"""Numpy implementations of the hot kernels, used when the extension is absent."""

import numpy as np

_CHUNK = 1 << 22


def orthant_sum(points, atoms, weights, strict, num_threads=1):
    """For every point p, the sum of weights of atoms q with q < p (or q <= p).

    The comparison is componentwise; ``strict`` selects ``<``.  Atoms are
    accumulated in list order so the result matches the compiled kernel up to
    rounding.
    """
    points = np.ascontiguousarray(points, dtype=float)
    atoms = np.ascontiguousarray(atoms, dtype=float)
    weights = np.ascontiguousarray(weights, dtype=float)
    m, k = points.shape[0], atoms.shape[0]
    out = np.zeros(m)
    if m == 0 or k == 0:
        return out
    step = max(1, _CHUNK // max(1, k * points.shape[1]))
    cmp = np.less if strict else np.less_equal
    for s in range(0, m, step):
        blk = points[s:s + step]
        mask = np.all(cmp(atoms[None, :, :], blk[:, None, :]), axis=2)
        out[s:s + step] = np.where(mask, weights[None, :], 0.0).cumsum(axis=1)[:, -1]
    return out
