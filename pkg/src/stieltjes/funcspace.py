"""Tagged functions and the operations built from their boundary limits.

A :class:`TaggedFunction` couples a vectorised evaluator with its domain, a
continuity tag and declared properties (grounded, bounded).  Lower and upper
marginals are iterated one-sided limits toward the lower or upper domain
corner along the axes that are dropped.  They are evaluated numerically by a
geometric offset sequence unless the endpoint is closed and the tag makes
direct evaluation legitimate, or a subclass supplies the limit in closed form.

Survival functions and grounded cores are inclusion-exclusion sums over
these marginals, and semi-copulas and one-dimensional distribution functions
are provided as ready-made families.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Callable, Mapping, Sequence

import numpy as np

from .domain import BoxDomain, GridMesh, SubsetIndex, enumerate_subsets
from .errors import (CornerDivergenceError, DomainError, LimitDivergenceError,
                     MarginalDivergenceError, OrderSensitivityError)


class ContinuityTag(enum.Enum):
    LEFT = "left"
    RIGHT = "right"
    CONTINUOUS = "continuous"
    UNTAGGED = "untagged"

    @classmethod
    def parse(cls, value) -> "ContinuityTag":
        if isinstance(value, cls):
            return value
        if value is None:
            return cls.UNTAGGED
        key = str(value).strip().lower()
        aliases = {"left": cls.LEFT, "leftcontinuous": cls.LEFT, "right": cls.RIGHT,
                   "rightcontinuous": cls.RIGHT, "continuous": cls.CONTINUOUS,
                   "untagged": cls.UNTAGGED}
        try:
            return aliases[key.replace("_", "").replace("-", "")]
        except KeyError:
            raise ValueError(f"unknown continuity tag {value!r}") from None

    @property
    def right_continuous(self) -> bool:
        return self in (ContinuityTag.RIGHT, ContinuityTag.CONTINUOUS)

    @property
    def left_continuous(self) -> bool:
        return self in (ContinuityTag.LEFT, ContinuityTag.CONTINUOUS)

    @property
    def one_sided(self) -> bool:
        return self is not ContinuityTag.UNTAGGED


@dataclass(frozen=True)
class LimitScheme:
    """Offset sequence ``eps_k = eps0 * 2**-k`` used for one-sided limits.

    A limit is accepted once two successive evaluations differ by less than
    ``tol`` (absolute, maximum over all query points).  Limits over several
    axes are nested in axis order; when ``check_order`` is set they are
    recomputed in reverse order and must agree within ``order_tol``.
    """

    eps0: float = 1e-2
    tol: float = 1e-9
    max_halvings: int = 40
    order_tol: float = 1e-7
    check_order: bool = True

    def offsets(self):
        return (self.eps0 * 2.0 ** -k for k in range(self.max_halvings + 1))


DEFAULT_SCHEME = LimitScheme()


class TaggedFunction:
    """A real function on a box domain with a continuity tag.

    Parameters
    ----------
    evaluator : callable
        Maps an array of shape ``(m, d)`` to an array of shape ``(m,)``.
    domain : BoxDomain
    tag : ContinuityTag or str
    grounded : bool
        Declared groundedness (all lower marginals on proper subsets vanish).
    bound : float, optional
        Declared bound ``M`` with ``|f| <= M``; ``None`` if not declared.
    name, params
        Family metadata, informational only.
    """

    def __init__(self, evaluator: Callable[[np.ndarray], np.ndarray], domain: BoxDomain,
                 tag=ContinuityTag.UNTAGGED, grounded: bool = False, bound: float | None = None,
                 name: str = "custom", params: Mapping | None = None):
        self._evaluator = evaluator
        self.domain = domain
        self.tag = ContinuityTag.parse(tag)
        self.grounded = bool(grounded)
        self.bound = None if bound is None else float(bound)
        self.name = name
        self.params = dict(params or {})

    @property
    def dims(self) -> int:
        return self.domain.dims

    @property
    def bounded(self) -> bool:
        return self.bound is not None

    def evaluate(self, points: np.ndarray) -> np.ndarray:
        """Evaluate at an ``(m, d)`` array of points."""
        pts = np.asarray(points, dtype=float)
        if pts.ndim != 2 or pts.shape[1] != self.dims:
            raise ValueError(f"expected points of shape (m, {self.dims}), got {pts.shape}")
        out = np.asarray(self._evaluator(pts), dtype=float)
        return np.broadcast_to(out, (pts.shape[0],)).copy() if out.ndim == 0 else out.reshape(-1)

    def __call__(self, x):
        arr = np.asarray(x, dtype=float)
        if self.dims == 1 and arr.ndim <= 1:
            vals = self.evaluate(arr.reshape(-1, 1))
            return float(vals[0]) if arr.ndim == 0 else vals
        if arr.ndim == 1:
            return float(self.evaluate(arr[None, :])[0])
        return self.evaluate(arr.reshape(-1, self.dims)).reshape(arr.shape[:-1])

    # Hooks for subclasses that know their limits in closed form.
    def exact_marginal(self, subset: SubsetIndex, side: str) -> "TaggedFunction | None":
        return None

    def exact_corner(self, side: str) -> float | None:
        return None

    def induced_measure(self, subset: SubsetIndex | None = None):
        """Exact measure induced by the lower marginal on ``subset``, if known."""
        return None

    def density(self, subset: SubsetIndex | None = None):
        """Mixed-partial density of the lower marginal on ``subset``, if known."""
        return None

    def with_tag(self, tag) -> "TaggedFunction":
        return TaggedFunction(self._evaluator, self.domain, tag, self.grounded, self.bound,
                              self.name, self.params)

    def __repr__(self) -> str:
        return (f"{type(self).__name__}(name={self.name!r}, dims={self.dims}, "
                f"tag={self.tag.value}, grounded={self.grounded}, bound={self.bound})")


def _offset_coordinate(domain: BoxDomain, axis: int, side: str, eps: float) -> float:
    a, b = domain.lower[axis], domain.upper[axis]
    if side == "lower":
        if math.isinf(a):
            anchor = b if math.isfinite(b) else 0.0
            return min(anchor, 0.0) - 1.0 / eps
        width = b - a
        return a + eps * (min(1.0, width) if math.isfinite(width) else 1.0)
    if math.isinf(b):
        anchor = a if math.isfinite(a) else 0.0
        return max(anchor, 0.0) + 1.0 / eps
    width = b - a
    return b - eps * (min(1.0, width) if math.isfinite(width) else 1.0)


def _nested_limit(evaluate, slots, position, scheme, error_cls, what):
    """Iterated limit of ``evaluate(coords)`` over ``slots``, first slot outermost.

    ``position(slot, eps)`` gives the coordinate of a slot at offset ``eps``;
    ``coords`` maps each slot to its current coordinate.
    """
    coords: dict = {}

    def rec(level):
        if level == len(slots):
            return np.asarray(evaluate(coords), dtype=float)
        slot = slots[level]
        prev = None
        resid = math.inf
        for eps in scheme.offsets():
            coords[slot] = position(slot, eps)
            val = rec(level + 1)
            if prev is not None:
                diff = float(np.max(np.abs(val - prev))) if val.size else 0.0
                if diff < scheme.tol:
                    return val
                resid = diff
            prev = val
        raise error_cls(f"{what}: limit in slot {slot} did not stabilize "
                        f"(last difference {resid:.3g})", residual=resid)

    value = rec(0)
    if scheme.check_order and len(slots) >= 2:
        single = LimitScheme(scheme.eps0, scheme.tol, scheme.max_halvings, scheme.order_tol, False)
        rev = _nested_limit(evaluate, slots[::-1], position, single, error_cls, what)
        gap = float(np.max(np.abs(value - rev))) if value.size else 0.0
        if not gap <= scheme.order_tol:
            raise OrderSensitivityError(f"{what}: iterated limit depends on the axis order "
                                        f"(gap {gap:.3g})", residual=gap)
    return value


def _boundary_position(domain: BoxDomain):
    return lambda slot, eps: _offset_coordinate(domain, slot[0], slot[1], eps)


def _boundary_plan(f: TaggedFunction, axes, side: str):
    """Split dropped axes into directly evaluated ones and limit slots."""
    fixed, slots = {}, []
    dom = f.domain
    for j in axes:
        if side == "lower":
            if dom.lower_closed[j] and f.tag.right_continuous:
                fixed[j] = dom.lower[j]
            else:
                slots.append((j, "lower"))
        else:
            if dom.upper_closed[j] and f.tag.left_continuous:
                fixed[j] = dom.upper[j]
            else:
                slots.append((j, "upper"))
    return fixed, slots


def _marginal(f: TaggedFunction, subset: SubsetIndex, side: str, scheme: LimitScheme):
    if subset.dims != f.dims:
        raise ValueError("subset dimension does not match the function")
    if subset.is_empty:
        raise ValueError("use corner_value for the empty subset")
    if subset.is_full:
        return f
    exact = f.exact_marginal(subset, side)
    if exact is not None:
        return exact
    keep = subset.axes
    fixed, slots = _boundary_plan(f, subset.complement.axes, side)
    d = f.dims

    def evaluator(pts):
        m = pts.shape[0]

        def at(coords):
            full = np.empty((m, d))
            full[:, keep] = pts
            for j, v in fixed.items():
                full[:, j] = v
            for (j, _), v in coords.items():
                full[:, j] = v
            return f.evaluate(full)

        if not slots:
            return at({})
        return _nested_limit(at, slots, _boundary_position(f.domain), scheme,
                             MarginalDivergenceError,
                             f"{side} marginal {subset} of {f.name}")

    return TaggedFunction(evaluator, f.domain.restrict(subset), f.tag, f.grounded, f.bound,
                          f"{f.name}_{side}{subset}", {"parent": f.name})


def lower_marginal(f: TaggedFunction, subset: SubsetIndex,
                   scheme: LimitScheme = DEFAULT_SCHEME) -> TaggedFunction:
    """``f_I``: the dropped coordinates tend to the lower domain corner."""
    return _marginal(f, subset, "lower", scheme)


def upper_marginal(f: TaggedFunction, subset: SubsetIndex,
                   scheme: LimitScheme = DEFAULT_SCHEME) -> TaggedFunction:
    """``f^I``: the dropped coordinates tend to the upper domain corner."""
    return _marginal(f, subset, "upper", scheme)


def corner_value(f: TaggedFunction, which: str = "lower",
                 scheme: LimitScheme = DEFAULT_SCHEME) -> float:
    """The limit of ``f`` toward the lower (``f_∅``) or upper (``f^∅``) corner."""
    if which not in ("lower", "upper"):
        raise ValueError("which must be 'lower' or 'upper'")
    exact = f.exact_corner(which)
    if exact is not None:
        return float(exact)
    fixed, slots = _boundary_plan(f, range(f.dims), which)
    d = f.dims

    def at(coords):
        pt = np.empty((1, d))
        for j, v in fixed.items():
            pt[0, j] = v
        for (j, _), v in coords.items():
            pt[0, j] = v
        return f.evaluate(pt)

    try:
        if not slots:
            val = at({})
        else:
            val = _nested_limit(at, slots, _boundary_position(f.domain), scheme,
                                CornerDivergenceError,
                                f"{which} corner of {f.name}")
    except OrderSensitivityError:
        raise
    except LimitDivergenceError as exc:
        raise CornerDivergenceError(str(exc), residual=exc.residual) from None
    v = float(val[0])
    if not math.isfinite(v):
        raise CornerDivergenceError(f"{which} corner of {f.name} is not finite", residual=math.inf)
    return v


def survival(f: TaggedFunction, scheme: LimitScheme = DEFAULT_SCHEME) -> TaggedFunction:
    """Inclusion-exclusion over upper marginals: ``sum_I (-1)^|I| f^I(x_I)``."""
    d = f.dims
    corner = corner_value(f, "upper", scheme)
    parts = [(s, upper_marginal(f, s, scheme)) for s in enumerate_subsets(d)]

    def evaluator(pts):
        total = np.full(pts.shape[0], corner)
        for s, g in parts:
            sign = -1.0 if len(s) % 2 else 1.0
            total = total + sign * g.evaluate(pts[:, s.axes])
        return total

    bound = None if f.bound is None else (2 ** d) * f.bound
    return TaggedFunction(evaluator, f.domain, f.tag, False, bound, f"survival({f.name})",
                          {"parent": f.name})


def grounded_core(f: TaggedFunction, scheme: LimitScheme = DEFAULT_SCHEME) -> TaggedFunction:
    """``F^f = sum_I (-1)^(d-|I|) f_I(x_I)``, the box increment of ``f`` from ``a``."""
    d = f.dims
    corner = corner_value(f, "lower", scheme)
    parts = [(s, lower_marginal(f, s, scheme)) for s in enumerate_subsets(d)]

    def evaluator(pts):
        total = np.full(pts.shape[0], corner * (-1.0) ** d)
        for s, g in parts:
            sign = -1.0 if (d - len(s)) % 2 else 1.0
            total = total + sign * g.evaluate(pts[:, s.axes])
        return total

    bound = None if f.bound is None else (2 ** d) * f.bound
    return TaggedFunction(evaluator, f.domain, f.tag, True, bound, f"core({f.name})",
                          {"parent": f.name})


@dataclass
class GroundednessProbe:
    per_axis: dict[int, float]
    threshold: float

    @property
    def grounded(self) -> bool:
        return all(v < self.threshold for v in self.per_axis.values())


def groundedness_probe(f: TaggedFunction, samples: int = 9, scheme: LimitScheme = DEFAULT_SCHEME,
                       threshold: float = 1e-8) -> GroundednessProbe:
    """Largest ``|f|`` on slices next to each lower face, at the finest offset."""
    d = f.dims
    eps = scheme.eps0 * 2.0 ** -scheme.max_halvings
    axes_pts = []
    for i in range(d):
        a, b = f.domain.lower[i], f.domain.upper[i]
        lo = a if math.isfinite(a) else -10.0
        hi = b if math.isfinite(b) else lo + 10.0
        axes_pts.append(np.linspace(lo, hi, samples))
    pts = GridMesh(axes_pts).points()
    out = {}
    for j in range(d):
        slab = pts.copy()
        slab[:, j] = _offset_coordinate(f.domain, j, "lower", eps)
        out[j] = float(np.max(np.abs(f.evaluate(slab))))
    return GroundednessProbe(out, threshold)


class Polynomial(TaggedFunction):
    """Finite sum of monomials ``c * prod x_i**p_i`` with closed-form densities."""

    def __init__(self, terms: Sequence[tuple[float, Sequence[int]]], domain: BoxDomain,
                 tag=ContinuityTag.CONTINUOUS, grounded: bool = False, bound=None,
                 name: str = "polynomial"):
        self.terms = [(float(c), tuple(int(p) for p in pw)) for c, pw in terms]
        for _, pw in self.terms:
            if len(pw) != domain.dims or min(pw, default=0) < 0:
                raise ValueError("monomial exponents must be nonnegative, one per axis")
        super().__init__(self._eval, domain, tag, grounded, bound, name,
                         {"terms": [[c, list(p)] for c, p in self.terms]})

    def _eval(self, pts):
        out = np.zeros(pts.shape[0])
        for c, pw in self.terms:
            out = out + c * np.prod(pts ** np.asarray(pw, dtype=float), axis=1)
        return out

    def exact_marginal(self, subset, side):
        ends = self.domain.lower if side == "lower" else self.domain.upper
        drop = subset.complement.axes
        if any(not math.isfinite(ends[j]) for j in drop):
            return None
        terms = []
        for c, pw in self.terms:
            coef = c * math.prod(ends[j] ** pw[j] for j in drop)
            terms.append((coef, [pw[i] for i in subset.axes]))
        return Polynomial(terms, self.domain.restrict(subset), self.tag, self.grounded,
                          self.bound, f"{self.name}_{side}{subset}")

    def exact_corner(self, side):
        ends = self.domain.lower if side == "lower" else self.domain.upper
        if not all(map(math.isfinite, ends)):
            return None
        return sum(c * math.prod(e ** p for e, p in zip(ends, pw)) for c, pw in self.terms)

    def density(self, subset=None):
        subset = subset or SubsetIndex.full(self.dims)
        g = self if subset.is_full else self.exact_marginal(subset, "lower")
        if g is None:
            return None
        terms = []
        for c, pw in g.terms:
            if min(pw) == 0:
                continue
            terms.append((c * math.prod(pw), [p - 1 for p in pw]))
        dens = Polynomial(terms or [(0.0, [0] * len(subset))], g.domain, name=f"d({g.name})")
        return dens.evaluate


def product_minus(domain: BoxDomain | None = None) -> Polynomial:
    """``x1*x2 - x1`` on ``[0, inf)^2`` by default."""
    return Polynomial([(1.0, (1, 1)), (-1.0, (1, 0))], domain or BoxDomain.positive_orthant(2),
                      name="product_minus")


class SemiCopulaFamily(TaggedFunction):
    """Semi-copula on ``[0,1]^d`` with family metadata and a Lipschitz constant."""

    def __init__(self, evaluator, dims: int, family: str, lipschitz: float | None = None,
                 params: Mapping | None = None, name: str | None = None):
        super().__init__(evaluator, BoxDomain.unit(dims), ContinuityTag.CONTINUOUS, True, 1.0,
                         name or family, params)
        self.family = family
        self.lipschitz = None if lipschitz is None else float(lipschitz)

    @classmethod
    def independence(cls, d: int = 2) -> "SemiCopulaFamily":
        return cls(lambda u: np.prod(u, axis=1), d, "independence", 1.0, {"dims": d})

    @classmethod
    def upper_frechet(cls, d: int = 2) -> "SemiCopulaFamily":
        return cls(lambda u: np.min(u, axis=1), d, "upper_frechet", 1.0, {"dims": d})

    @classmethod
    def lower_frechet(cls, d: int = 2) -> "SemiCopulaFamily":
        return cls(lambda u: np.maximum(np.sum(u, axis=1) - (d - 1), 0.0), d, "lower_frechet",
                   1.0, {"dims": d})

    @classmethod
    def convex_combination(cls, weights: Sequence[float],
                           members: Sequence["SemiCopulaFamily"]) -> "SemiCopulaFamily":
        w = np.asarray(weights, dtype=float)
        if len(w) != len(members) or np.any(w < 0) or not math.isclose(w.sum(), 1.0):
            raise ValueError("convex weights must be nonnegative, sum to 1, one per member")
        d = members[0].dims
        if any(m.dims != d for m in members):
            raise DomainError("members of a convex combination must share the dimension")
        lips = [m.lipschitz for m in members]
        lip = None if any(x is None for x in lips) else float(np.dot(w, lips))

        def ev(u):
            out = np.zeros(u.shape[0])
            for wi, m in zip(w, members):
                out = out + wi * m.evaluate(u)
            return out

        return cls(ev, d, "convex_combination", lip,
                   {"weights": w.tolist(), "members": [m.family for m in members]})

    @classmethod
    def user_defined(cls, fn, d: int, lipschitz: float | None = None,
                     name: str = "user_defined") -> "SemiCopulaFamily":
        return cls(fn, d, "user_defined", lipschitz, {}, name)


independence = SemiCopulaFamily.independence
upper_frechet = SemiCopulaFamily.upper_frechet
lower_frechet = SemiCopulaFamily.lower_frechet


@dataclass
class SemicopulaReport:
    uniform_marginals: bool
    increasing: bool
    lipschitz_L: float
    grounded: bool
    details: dict = field(default_factory=dict)

    @property
    def is_semicopula(self) -> bool:
        return self.uniform_marginals and self.increasing

    def is_quasicopula(self, tol: float = 1e-9) -> bool:
        return self.is_semicopula and self.lipschitz_L <= 1.0 + tol


def check_semicopula(S: TaggedFunction, mesh: GridMesh, tol: float = 1e-12) -> SemicopulaReport:
    """Check the semi-copula axioms on the nodes of ``mesh`` and estimate ``L``.

    ``L`` is the maximum of ``|S(u) - S(v)| / |u - v|_1`` over neighbouring
    nodes along one axis.
    """
    d = S.dims
    if mesh.dims != d:
        raise DomainError("mesh dimension differs from the semi-copula")
    vals = S.evaluate(mesh.points()).reshape(mesh.shape)
    details = {}
    uniform = True
    for i, c in enumerate(mesh.coords):
        pts = np.ones((c.size, d))
        pts[:, i] = c
        err = float(np.max(np.abs(S.evaluate(pts) - c)))
        details[f"marginal_error_{i + 1}"] = err
        uniform &= err <= tol
    increasing = True
    lip = 0.0
    for i, c in enumerate(mesh.coords):
        diff = np.diff(vals, axis=i)
        increasing &= bool(np.all(diff >= -tol))
        shape = [1] * d
        shape[i] = c.size - 1
        lip = max(lip, float(np.max(np.abs(diff) / np.diff(c).reshape(shape))))
    grounded = True
    pts = mesh.points()
    for i in range(d):
        slab = pts.copy()
        slab[:, i] = 0.0
        grounded &= bool(np.max(np.abs(S.evaluate(slab))) <= tol)
    return SemicopulaReport(bool(uniform), bool(increasing), lip, bool(grounded), details)


class DistributionFunction1D(TaggedFunction):
    """Right-continuous distribution function on an interval.

    Either a finite jump list (``points``, ``masses``) or a continuous ``cdf``
    with an optional closed-form ``quantile``.  Jump masses may sum to less
    than one, which models a truncated distribution.
    """

    def __init__(self, points=None, masses=None, *, cdf=None, quantile=None,
                 domain: BoxDomain | None = None, cumulative=None, name: str | None = None):
        dom = domain or BoxDomain([0.0], [1.0])
        if dom.dims != 1:
            raise DomainError("distribution functions are one-dimensional")
        self._quantile = quantile
        if cdf is not None:
            self.points = self.masses = self.cumulative = None
            self._cdf = cdf
            super().__init__(lambda x: np.asarray(cdf(x[:, 0]), dtype=float), dom,
                             ContinuityTag.CONTINUOUS, True, 1.0, name or "continuous_cdf")
            return
        p = np.asarray(points, dtype=float).ravel()
        m = np.asarray(masses, dtype=float).ravel()
        if p.size == 0 or p.size != m.size:
            raise ValueError("need matching, nonempty jump points and masses")
        if np.any(np.diff(p) <= 0):
            raise ValueError("jump points must be strictly increasing")
        if np.any(m <= 0):
            raise ValueError("jump masses must be positive")
        if not dom.contains(p[:, None]):
            raise DomainError("jump points must lie in the domain")
        cum = np.cumsum(m) if cumulative is None else np.asarray(cumulative, dtype=float)
        if cum[-1] > 1.0 + 1e-12:
            raise ValueError("jump masses sum to more than one")
        if abs(cum[-1] - 1.0) <= 1e-12:
            cum[-1] = 1.0
        self.points, self.masses, self.cumulative = p, m, cum
        self._cdf = None
        super().__init__(self._step, dom, ContinuityTag.RIGHT, True, 1.0, name or "discrete_cdf",
                         {"points": p.tolist(), "masses": m.tolist()})

    def _step(self, x):
        idx = np.searchsorted(self.points, x[:, 0], side="right") - 1
        return np.where(idx >= 0, self.cumulative[np.clip(idx, 0, None)], 0.0)

    @classmethod
    def uniform(cls) -> "DistributionFunction1D":
        """Uniform distribution on ``[0,1]``; its generalized inverse is the identity."""
        return cls(cdf=lambda x: np.clip(x, 0.0, 1.0), quantile=lambda t: np.asarray(t, float),
                   name="uniform")

    @property
    def is_discrete(self) -> bool:
        return self.points is not None

    @property
    def total_mass(self) -> float:
        return float(self.cumulative[-1]) if self.is_discrete else 1.0
