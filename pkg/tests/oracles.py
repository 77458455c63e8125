"""Brute-force reference computations, independent of the library code paths.

Everything here uses plain Python loops over cells, vertices and atoms.
The frozen sequences were produced by :func:`hk_bruteforce` before the
library was written and are kept as literals so that the tests do not
depend on rerunning the slow loops at large ``n``.
"""

import itertools
import math

#: HK variation on the uniform n-mesh of the unit cube, anchored at the
#: lower corner, node values taken as is (no boundary limits)
HK_LEVELS = (4, 8, 16, 32, 64)
FROZEN_HK = {
    "diagonal_indicator": (8, 16, 32, 64, 128),       # 1{x >= y}
    "antidiagonal_indicator": (9, 17, 33, 65, 129),   # 1{x + y >= 1}
    "lower_frechet_3": (4, 8, 16, 32, 64),            # max(x + y + z - 2, 0)
    "upper_frechet_2": (1, 1, 1, 1, 1),               # min(x, y)
    "independence_2": (1, 1, 1, 1, 1),                # x y
}

ORACLE_FUNCTIONS = {
    "diagonal_indicator": (2, lambda x, y: 1.0 if x >= y else 0.0),
    "antidiagonal_indicator": (2, lambda x, y: 1.0 if x + y >= 1 else 0.0),
    "lower_frechet_3": (3, lambda x, y, z: max(x + y + z - 2.0, 0.0)),
    "upper_frechet_2": (2, lambda x, y: min(x, y)),
    "independence_2": (2, lambda x, y: x * y),
}


def quasi_volume(f, lo, hi):
    """Alternating vertex sum of ``f`` over the box ``[lo, hi]``."""
    d = len(lo)
    total = 0.0
    for corner in itertools.product((0, 1), repeat=d):
        x = [hi[i] if c else lo[i] for i, c in enumerate(corner)]
        total += (-1) ** (d - sum(corner)) * f(*x)
    return total


def hk_bruteforce(f, n, d, anchor=0.0):
    """Sum over nonempty ``I`` of the cell sums of ``|quasi-volume|`` of ``f_I``."""
    nodes = [k / n for k in range(n + 1)]
    total = 0.0
    for r in range(1, d + 1):
        for I in itertools.combinations(range(d), r):
            def fI(*xi, I=I):
                x = [anchor] * d
                for pos, j in enumerate(I):
                    x[j] = xi[pos]
                return f(*x)
            for idx in itertools.product(range(n), repeat=r):
                lo = [nodes[k] for k in idx]
                hi = [nodes[k + 1] for k in idx]
                total += abs(quasi_volume(fI, lo, hi))
    return total


def step_value(constant, components, x, strict):
    """``c + sum_J sum_q w_q 1{q_J (<|<=) x_J}`` with explicit loops."""
    total = constant
    for axes, atoms in components.items():
        for q, w in atoms:
            inside = True
            for pos, j in enumerate(axes):
                if (q[pos] >= x[j]) if strict else (q[pos] > x[j]):
                    inside = False
                    break
            if inside:
                total += w
    return total


def fubini_double_sum(g_const, g_components, g_strict, h_atoms):
    """``sum_p w_h(p) g(p)``: the integral of ``g`` against the atoms of a grounded step ``h``.

    ``g_components`` maps axis tuples to lists of ``(point, weight)``.
    A left-continuous ``g`` uses strict comparisons.
    """
    return math.fsum(w * step_value(g_const, g_components, p, g_strict) for p, w in h_atoms)


def survival_fubini(h_atoms, h_strict, g_atoms, upper):
    """``sum_q w_g(q) hbar(q)`` for grounded steps ``g`` and ``h``.

    For a grounded ``h = sum_p w_p 1{p (<|<=) x}`` on a box with upper
    corner ``upper``, ``hbar(x)`` is the mass of atoms in the upper
    orthant of ``x``: ``p > x`` (right-continuous ``h``) or ``p >= x``
    (left-continuous ``h``) on every axis.
    """
    total = []
    for q, v in g_atoms:
        s = 0.0
        for p, w in h_atoms:
            if all((pj >= qj) if h_strict else (pj > qj) for pj, qj in zip(p, q)):
                s += w
        total.append(v * s)
    return math.fsum(total)
