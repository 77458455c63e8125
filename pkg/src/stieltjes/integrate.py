"""Integral operators on atomic measures and the integration-by-parts check.

``psi(f, m)`` integrates ``f`` against a finite signed measure.  ``pi(g, f)``
integrates the lower marginals of ``f`` against the measures induced by the
lower marginals of ``g`` and adds the corner product ``f_∅ g_∅``.  For a
bounded, grounded ``h`` and opposite one-sided tags, ``psi(g, nu_h)`` and
``pi(g, survival(h))`` agree; :func:`ibp_check` computes both and reports the
residual together with any violated hypothesis.

Measures of marginals are taken from the exact hooks of step functions when
available, otherwise from a density (midpoint rule) or by sampling on a
mesh and extracting quasi-volumes.  Every subset uses the same mesh.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .domain import BoxDomain, GridMesh, SubsetIndex, enumerate_subsets
from .errors import (DomainError, EvaluationError, HypothesisError, LimitDivergenceError,
                     MarginalMeasureError, TagRequiredError)
from .funcspace import (DEFAULT_SCHEME, ContinuityTag, DistributionFunction1D, LimitScheme,
                        TaggedFunction, corner_value, lower_marginal, survival)
from ._text import dump as _dump
from .measures import AtomicSignedMeasure, GridField, extract_measure, measure_from_density, sample

QUANTILE_TOL = 1e-12


def psi(f: TaggedFunction, m: AtomicSignedMeasure) -> float:
    """``sum_k f(p_k) w_k`` over the atoms of ``m`` (correctly rounded sum)."""
    if isinstance(f, TaggedFunction) and f.tag is ContinuityTag.UNTAGGED:
        raise TagRequiredError(f"{f.name}: integration needs a continuity tag")
    if m.is_null:
        return 0.0
    vals = f.evaluate(m.points)
    bad = ~np.isfinite(vals)
    if np.any(bad):
        raise EvaluationError(f"{f.name} is not finite at atom {tuple(m.points[bad][0])}")
    return math.fsum(vals * m.weights)


@dataclass
class IbpBreakdown:
    terms: dict[SubsetIndex, float]
    corner: float
    total: float

    def to_dict(self) -> dict:
        return {"terms": {str(s): v for s, v in self.terms.items()}, "corner": self.corner,
                "total": self.total}


def _total(terms: dict, corner: float) -> float:
    acc = 0.0
    for s in sorted(terms):
        acc += terms[s]
    return acc + corner


def marginal_measure_of(g, subset: SubsetIndex, mesh: GridMesh | None = None,
                        method: str = "auto", scheme: LimitScheme = DEFAULT_SCHEME
                        ) -> AtomicSignedMeasure:
    """Measure induced by the lower marginal of ``g`` on ``subset``.

    ``method`` is one of ``"auto"``, ``"exact"``, ``"density"``, ``"extract"``.
    ``auto`` prefers an exact hook, then extraction on ``mesh``.
    """
    try:
        if isinstance(g, GridField):
            if mesh is not None and mesh != g.mesh:
                raise MarginalMeasureError("grid field and mesh differ; mixing resolutions "
                                           "across marginals is not supported")
            return extract_measure(g.slice_lower(subset))
        if method in ("auto", "exact"):
            m = g.induced_measure(subset)
            if m is not None:
                return m
            if method == "exact":
                raise MarginalMeasureError(f"{g.name} has no exact measure for {subset}")
        if mesh is None:
            raise MarginalMeasureError(f"a mesh is needed for the marginal {subset} of {g.name}")
        sub = mesh.restrict(subset)
        if method == "density":
            rho = g.density(subset)
            if rho is None:
                raise MarginalMeasureError(f"{g.name} has no density for {subset}")
            return measure_from_density(rho, sub)
        gi = g if subset.is_full else lower_marginal(g, subset, scheme)
        return extract_measure(sample(gi, sub, scheme))
    except LimitDivergenceError as exc:
        raise MarginalMeasureError(f"marginal {subset} of {getattr(g, 'name', 'field')} is "
                                   f"not measure inducing: {exc}") from exc


def _lower_corner(g, scheme) -> float:
    if isinstance(g, GridField):
        return g.corner("lower")
    return corner_value(g, "lower", scheme)


def pi(g, f: TaggedFunction, mesh: GridMesh | None = None, method: str = "auto",
       scheme: LimitScheme = DEFAULT_SCHEME) -> IbpBreakdown:
    """Integration-by-parts operator ``sum_I int f_I d nu_{g_I} + f_∅ g_∅``."""
    if f.tag is ContinuityTag.UNTAGGED:
        raise TagRequiredError(f"{f.name}: integration needs a continuity tag")
    if isinstance(g, TaggedFunction) and g.tag is ContinuityTag.UNTAGGED:
        raise TagRequiredError(f"{g.name}: integration needs a continuity tag")
    d = f.dims
    if g.dims != d:
        raise DomainError("integrand and integrator differ in dimension")
    grounded = getattr(g, "grounded", False)
    terms = {}
    for s in enumerate_subsets(d):
        if grounded and not s.is_full:
            terms[s] = 0.0
            continue
        m = marginal_measure_of(g, s, mesh, method, scheme)
        terms[s] = 0.0 if m.is_null else psi(lower_marginal(f, s, scheme), m)
    g0 = 0.0 if grounded else _lower_corner(g, scheme)
    corner = 0.0 if g0 == 0.0 else corner_value(f, "lower", scheme) * g0
    return IbpBreakdown(terms, corner, _total(terms, corner))


@dataclass
class IbpReport:
    lhs: float
    rhs: float
    residual: float
    flags: list[str] = field(default_factory=list)
    breakdown: IbpBreakdown | None = None

    def to_dict(self) -> dict:
        out = {"lhs": self.lhs, "rhs": self.rhs, "residual": self.residual,
               "flags": list(self.flags)}
        if self.breakdown is not None:
            out["breakdown"] = self.breakdown.to_dict()
        return out

    def to_text(self) -> str:
        return _dump(self.to_dict())


def _tags_opposite(g: TaggedFunction, h: TaggedFunction) -> bool:
    gl, gr = g.tag.left_continuous, g.tag.right_continuous
    hl, hr = h.tag.left_continuous, h.tag.right_continuous
    return (gl and hr) or (gr and hl)


def ibp_check(g: TaggedFunction, h: TaggedFunction, mesh: GridMesh | None = None,
              scheme: LimitScheme = DEFAULT_SCHEME) -> IbpReport:
    """Compare ``psi(g, nu_h)`` with ``pi(g, survival(h))``.

    ``h`` must be declared grounded and bounded.  If the tags are not
    opposite the computation still runs and the report carries the flag
    ``"hypothesis-violated"``; a common jump then breaks the identity.
    """
    missing = [w for w, ok in (("grounded", h.grounded), ("bounded", h.bounded)) if not ok]
    if missing:
        raise HypothesisError(f"{h.name} must be declared {' and '.join(missing)}")
    for fn in (g, h):
        if fn.tag is ContinuityTag.UNTAGGED:
            raise HypothesisError(f"{fn.name} carries no continuity tag")
    flags = []
    if not _tags_opposite(g, h):
        flags.append("hypothesis-violated")
    corner_value(g, "lower", scheme)
    nu_h = marginal_measure_of(h, SubsetIndex.full(h.dims), mesh, "auto", scheme)
    lhs = psi(g, nu_h)
    br = pi(g, survival(h, scheme), mesh, "auto", scheme)
    return IbpReport(lhs, br.total, abs(lhs - br.total), flags, br)


def generalized_inverse(F: DistributionFunction1D) -> Callable[[np.ndarray], np.ndarray]:
    """``t -> inf{x : F(x) >= t}``, with ``inf ∅`` the upper end of the axis."""
    a, b = F.domain.lower[0], F.domain.upper[0]
    if F.is_discrete:
        pts, cum = F.points, F.cumulative

        def inv(t):
            t = np.asarray(t, dtype=float)
            k = np.searchsorted(cum, t - QUANTILE_TOL, side="left")
            out = np.where(k < pts.size, pts[np.minimum(k, pts.size - 1)], b)
            return np.where(t <= 0.0, a, out)

        return inv
    if F._quantile is not None:
        return lambda t: np.asarray(F._quantile(np.asarray(t, dtype=float)), dtype=float)

    lo0 = a if math.isfinite(a) else -1e12
    hi0 = b if math.isfinite(b) else 1e12

    def bisect(t):
        t = np.asarray(t, dtype=float)
        lo = np.full(t.shape, lo0)
        hi = np.full(t.shape, hi0)
        for _ in range(200):
            mid = 0.5 * (lo + hi)
            ok = F(mid) >= t
            hi = np.where(ok, mid, hi)
            lo = np.where(ok, lo, mid)
        out = np.where(F(hi) >= t, hi, b)
        return np.where(t <= 0.0, a, out)

    return bisect


@dataclass
class TransformReport:
    lhs: float
    rhs: float
    residual: float
    flags: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {"lhs": self.lhs, "rhs": self.rhs, "residual": self.residual,
                "flags": list(self.flags)}

    def to_text(self) -> str:
        return _dump(self.to_dict())


def composite_with_quantiles(g: TaggedFunction, Fs: Sequence[DistributionFunction1D]
                             ) -> TaggedFunction:
    """``u -> g(F_1^[-1](u_1), ..., F_d^[-1](u_d))`` on ``[0,1]^d``."""
    invs = [generalized_inverse(F) for F in Fs]

    def ev(u):
        x = np.column_stack([inv(u[:, i]) for i, inv in enumerate(invs)])
        return g.evaluate(x)

    return TaggedFunction(ev, BoxDomain.unit(g.dims), g.tag, False, g.bound,
                          f"{g.name}∘F^[-1]")


def composite_with_cdfs(h: TaggedFunction, Fs: Sequence[DistributionFunction1D],
                        domain: BoxDomain) -> TaggedFunction:
    """``x -> h(F_1(x_1), ..., F_d(x_d))`` on ``domain``."""

    def ev(x):
        u = np.column_stack([F.evaluate(x[:, [i]]) for i, F in enumerate(Fs)])
        return h.evaluate(u)

    tag = ContinuityTag.RIGHT if h.tag in (ContinuityTag.CONTINUOUS, ContinuityTag.RIGHT) \
        else ContinuityTag.UNTAGGED
    return TaggedFunction(ev, domain, tag, False, h.bound, f"{h.name}∘F")


def quantile_mesh(Fs: Sequence[DistributionFunction1D], n: int = 64) -> GridMesh:
    """Mesh on ``[0,1]^d`` containing every attained level of discrete ``F_i``."""
    axes = []
    for F in Fs:
        base = np.linspace(0.0, 1.0, n + 1)
        if F.is_discrete:
            base = np.concatenate([[0.0, 1.0], F.cumulative])
        axes.append(np.unique(np.clip(base, 0.0, 1.0)))
    return GridMesh(axes)


def support_mesh(Fs: Sequence[DistributionFunction1D], domain: BoxDomain, n: int = 256
                 ) -> GridMesh:
    """Mesh on a bounded ``domain`` containing every jump point of the ``F_i``."""
    if not domain.is_bounded:
        raise DomainError("an explicit mesh is required on unbounded domains")
    axes = []
    for i, F in enumerate(Fs):
        lo, hi = domain.lower[i], domain.upper[i]
        pts = [np.linspace(lo, hi, n + 1)]
        if F.is_discrete:
            pts.append(F.points)
        axes.append(np.unique(np.concatenate(pts)))
    return GridMesh(axes)


def transform_check(g: TaggedFunction, Fs: Sequence[DistributionFunction1D], h: TaggedFunction,
                    mesh: GridMesh | None = None, x_mesh: GridMesh | None = None,
                    scheme: LimitScheme = DEFAULT_SCHEME) -> TransformReport:
    """Compare ``pi(g∘F^[-1], h)`` with ``pi(g, h∘F)``.

    The left side is always computed by sampling on the quantile mesh
    ``mesh`` (default: all attained levels of the ``F_i``).  The right side
    uses exact step-function measures where available and otherwise a mesh
    on the domain of ``g`` that contains all jump points.

    The flag ``"mass-at-level-one"`` is raised when a marginal measure of
    ``g`` charges points where some ``F_i`` already equals one; the two sides
    then differ by the integral of ``h`` over the upper faces.
    """
    if len(Fs) != g.dims or h.dims != g.dims:
        raise DomainError("need one distribution function per axis")
    G = composite_with_quantiles(g, Fs)
    umesh = mesh or quantile_mesh(Fs)
    left = pi(G, h, umesh, "extract", scheme)
    H = composite_with_cdfs(h, Fs, g.domain)
    xm = x_mesh
    has_exact = all(g.induced_measure(s) is not None for s in enumerate_subsets(g.dims))
    method = "auto"
    if not has_exact and xm is None and not any(F.is_discrete for F in Fs):
        # continuous F: sample both sides on matching nodes, x = F^[-1](u)
        axes = [generalized_inverse(F)(c) for F, c in zip(Fs, umesh.coords)]
        if all(np.all(np.isfinite(a)) and np.all(np.diff(a) > 0) for a in axes):
            xm, method = GridMesh(axes), "extract"
    if xm is None and not has_exact:
        xm = support_mesh(Fs, g.domain)
    if method == "auto" and not has_exact and g.density(SubsetIndex.full(g.dims)) is not None:
        method = "density"
    right = pi(g, H, xm, method, scheme)
    flags = []
    for s in enumerate_subsets(g.dims):
        m = marginal_measure_of(g, s, xm, method, scheme)
        if m.is_null:
            continue
        top = np.zeros(len(m), dtype=bool)
        for pos, i in enumerate(s.axes):
            top |= Fs[i].evaluate(m.points[:, [pos]]) >= 1.0
        if np.any(top & (m.weights != 0)):
            flags.append("mass-at-level-one")
            break
    return TransformReport(left.total, right.total, abs(left.total - right.total), flags)
