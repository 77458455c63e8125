"""Seeded random fixtures shared by the module and acceptance tests."""

import numpy as np

from stieltjes import AtomicSignedMeasure, BoxDomain, DistributionFunction1D, StepFunction
from stieltjes.domain import SubsetIndex, enumerate_subsets


def _atoms(rng, k, dims, lo=0.02, hi=0.98):
    return rng.uniform(lo, hi, size=(k, dims)), rng.normal(size=k)


def ibp_pair(d, seed, mirrored=False, grounded_g=False):
    """Step ``g`` with components on every subset and grounded step ``h``.

    ``g`` is left-continuous and ``h`` right-continuous, or the other way
    round when ``mirrored``.  Returns ``(g, h, oracle)`` where ``oracle``
    holds plain lists for the brute-force sums in :mod:`oracles`.
    """
    rng = np.random.default_rng(seed)
    dom = BoxDomain.unit(d)
    g_tag, h_tag = ("right", "left") if mirrored else ("left", "right")
    subsets = [SubsetIndex.full(d)] if grounded_g else enumerate_subsets(d)
    comps, plain = {}, {}
    for s in subsets:
        p, w = _atoms(rng, int(rng.integers(1, 5)), len(s))
        comps[s] = AtomicSignedMeasure(p, w, dims=len(s))
        plain[s.axes] = [(tuple(q), float(v)) for q, v in zip(p, w)]
    const = 0.0 if grounded_g else float(rng.normal())
    g = StepFunction(comps, dom, g_tag, const, name="g")
    hp, hw = _atoms(rng, int(rng.integers(1, 7)), d)
    h = StepFunction.from_measure(AtomicSignedMeasure(hp, hw, dims=d), dom, h_tag, name="h")
    oracle = {"g_const": const, "g_components": plain, "g_strict": g_tag == "left",
              "h_atoms": [(tuple(p), float(w)) for p, w in zip(hp, hw)],
              "h_strict": h_tag == "left"}
    return g, h, oracle


def transform_fixture(d, seed):
    """Left-continuous step ``g`` with atoms below the last jump of each ``F_i``.

    The ``F_i`` have jumps spread over ``[0.1, 0.8]`` with the last one in
    ``[0.72, 0.8]``; every atom of ``g`` lies in ``(0.05, 0.7)``, so no
    marginal measure of ``g`` charges a point where some ``F_i`` equals one.
    """
    rng = np.random.default_rng(seed)
    dom = BoxDomain.unit(d)
    comps = {}
    for s in enumerate_subsets(d):
        k = int(rng.integers(1, 4))
        comps[s] = AtomicSignedMeasure(rng.uniform(0.05, 0.7, size=(k, len(s))),
                                       rng.normal(size=k), dims=len(s))
    g = StepFunction(comps, dom, "left", float(rng.normal()), name="g")
    Fs = []
    for _ in range(d):
        k = int(rng.integers(2, 6))
        pts = np.sort(np.append(rng.uniform(0.1, 0.7, size=k - 1), rng.uniform(0.72, 0.8)))
        Fs.append(DistributionFunction1D(pts, rng.dirichlet(np.ones(k))))
    return g, Fs, rng.normal(size=(4,))
