"""Kernel dispatch: compiled extension when importable, numpy otherwise.

Set ``STIELTJES_BACKEND=python`` to force the fallback and
``STIELTJES_THREADS`` to cap the compiled kernel's thread count.
"""

import os
import warnings

import numpy as np

from . import _fallback

try:
    from . import _kernels as _compiled
except ImportError:  # pragma: no cover - depends on the build
    _compiled = None

if os.environ.get("STIELTJES_BACKEND", "").lower() == "python":
    BACKEND = "python"
elif _compiled is not None:
    BACKEND = "compiled"
else:
    BACKEND = "python"
    warnings.warn("compiled kernels unavailable, using the numpy fallback", RuntimeWarning,
                  stacklevel=2)


def thread_count() -> int:
    try:
        n = int(os.environ.get("STIELTJES_THREADS", "1"))
    except ValueError:
        n = 1
    return max(1, n)


def orthant_sum(points, atoms, weights, strict: bool, backend: str | None = None) -> np.ndarray:
    """Sum of atom weights in the lower orthant of each point.

    Parameters
    ----------
    points : array of shape (m, d)
    atoms : array of shape (k, d)
    weights : array of shape (k,)
    strict : bool
        Count atoms with ``q < p`` componentwise if true, ``q <= p`` otherwise.
    backend : {"compiled", "python"}, optional
        Override the module-level selection.
    """
    points = np.ascontiguousarray(np.atleast_2d(points), dtype=np.float64)
    atoms = np.ascontiguousarray(np.atleast_2d(atoms), dtype=np.float64)
    weights = np.ascontiguousarray(weights, dtype=np.float64).ravel()
    if atoms.size == 0 or weights.size == 0:
        return np.zeros(points.shape[0])
    if atoms.shape[1] != points.shape[1]:
        raise ValueError("points and atoms differ in dimension")
    use = backend or BACKEND
    if use == "compiled" and _compiled is not None:
        return _compiled.orthant_sum(points, atoms, weights, bool(strict), thread_count())
    return _fallback.orthant_sum(points, atoms, weights, bool(strict))
