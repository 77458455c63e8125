"""Finite signed measures and how functions induce them.

The induced measure of a function lives on quasi-volumes: the alternating
vertex sum over a box.  On a grid this sum is computed for every cell at once
by successive differencing, and each cell's mass is placed on the node the
continuity tag calls for (upper-right for right-continuous, lower-left for
left-continuous).  Step functions built from atom lists close the loop:
they evaluate by orthant sums and know their marginals and induced measures
exactly.
"""

from __future__ import annotations

import io
import itertools
import math
import os
from dataclasses import dataclass
from typing import Callable, Mapping, Sequence

import numpy as np

from . import kernels
from .domain import Box, BoxDomain, GridMesh, SubsetIndex, enumerate_subsets
from .errors import (DomainError, EvaluationError, LimitDivergenceError, TagRequiredError,
                     TransformError)
from .funcspace import (DEFAULT_SCHEME, ContinuityTag, LimitScheme, TaggedFunction,
                        _boundary_position, _nested_limit)

MERGE_TOL = 1e-12


def _snap_axis(values: np.ndarray, tol: float) -> np.ndarray:
    """Replace values that chain within ``tol`` of each other by the smallest one."""
    order = np.argsort(values, kind="stable")
    sv = values[order]
    rep = sv.copy()
    for i in range(1, sv.size):
        if sv[i] - sv[i - 1] <= tol:
            rep[i] = rep[i - 1]
    out = np.empty_like(values)
    out[order] = rep
    return out


class AtomicSignedMeasure:
    """Finite signed measure ``sum_k w_k * delta_{p_k}``.

    Points closer than ``merge_tol`` in every coordinate are identified and
    their weights added; atoms whose merged weight has magnitude at most
    ``drop_tol`` are removed.  Atoms are stored in lexicographic order.
    """

    def __init__(self, points, weights, domain: BoxDomain | None = None,
                 merge_tol: float = MERGE_TOL, drop_tol: float = 0.0, dims: int | None = None):
        w = np.asarray(weights, dtype=float).ravel()
        p = np.asarray(points, dtype=float)
        if dims is None:
            dims = domain.dims if domain is not None else (p.shape[1] if p.ndim == 2 else 1)
        p = p.reshape(-1, dims) if p.size else np.zeros((0, dims))
        if p.shape[0] != w.size:
            raise ValueError("number of points and weights differ")
        if not (np.all(np.isfinite(p)) and np.all(np.isfinite(w))):
            raise EvaluationError("atom points and weights must be finite")
        if w.size:
            snapped = np.column_stack([_snap_axis(p[:, j], merge_tol) for j in range(dims)])
            uniq, inv = np.unique(snapped, axis=0, return_inverse=True)
            acc = np.zeros(uniq.shape[0])
            np.add.at(acc, inv.ravel(), w)
            keep = np.abs(acc) > drop_tol
            p, w = uniq[keep], acc[keep]
        p.setflags(write=False)
        w.setflags(write=False)
        self.points, self.weights, self.domain, self._dims = p, w, domain, dims

    @classmethod
    def empty(cls, dims: int, domain: BoxDomain | None = None) -> "AtomicSignedMeasure":
        return cls(np.zeros((0, dims)), np.zeros(0), domain, dims=dims)

    @classmethod
    def dirac(cls, point, weight: float = 1.0, domain=None) -> "AtomicSignedMeasure":
        p = np.atleast_1d(np.asarray(point, dtype=float))
        return cls(p[None, :], [weight], domain, dims=p.size)

    @property
    def dims(self) -> int:
        return self._dims

    def __len__(self) -> int:
        return self.weights.size

    @property
    def is_null(self) -> bool:
        return self.weights.size == 0

    def positive(self) -> "AtomicSignedMeasure":
        k = self.weights > 0
        return AtomicSignedMeasure(self.points[k], self.weights[k], self.domain, dims=self.dims)

    def negative(self) -> "AtomicSignedMeasure":
        """The negated negative-weight atoms, a nonnegative measure."""
        k = self.weights < 0
        return AtomicSignedMeasure(self.points[k], -self.weights[k], self.domain, dims=self.dims)

    def total_variation(self) -> float:
        return float(np.abs(self.weights).sum())

    def total_mass(self) -> float:
        return float(self.weights.sum())

    def mass_below(self, x, strict: bool = False) -> np.ndarray:
        """Mass of ``{q <= x}`` (or ``{q < x}``) for each row of ``x``."""
        x = np.asarray(x, dtype=float).reshape(-1, self.dims)
        return kernels.orthant_sum(x, self.points, self.weights, strict)

    def mass_in(self, box: Box, closed_lower=False, closed_upper=True) -> float:
        lo, up = np.asarray(box.lower), np.asarray(box.upper)
        p = self.points
        ok_lo = p >= lo if closed_lower else p > lo
        ok_up = p <= up if closed_upper else p < up
        return float(self.weights[np.all(ok_lo & ok_up, axis=1)].sum())

    def marginal(self, subset: SubsetIndex) -> "AtomicSignedMeasure":
        """Project atoms onto the axes of ``subset`` and merge."""
        if subset.is_empty:
            raise ValueError("marginal measure needs a nonempty subset")
        dom = self.domain.restrict(subset) if self.domain is not None else None
        return AtomicSignedMeasure(self.points[:, subset.axes], self.weights, dom,
                                   dims=len(subset))

    def scaled(self, c: float) -> "AtomicSignedMeasure":
        return AtomicSignedMeasure(self.points, c * self.weights, self.domain, dims=self.dims)

    def __add__(self, other: "AtomicSignedMeasure") -> "AtomicSignedMeasure":
        if other.dims != self.dims:
            raise DomainError("cannot add measures of different dimension")
        return AtomicSignedMeasure(np.vstack([self.points, other.points]),
                                   np.concatenate([self.weights, other.weights]),
                                   self.domain or other.domain, dims=self.dims)

    def __neg__(self) -> "AtomicSignedMeasure":
        return self.scaled(-1.0)

    def __sub__(self, other: "AtomicSignedMeasure") -> "AtomicSignedMeasure":
        return self + (-other)

    def tv_distance(self, other: "AtomicSignedMeasure") -> float:
        """Total variation norm of the difference."""
        return (self - other).total_variation()

    def to_csv(self, target=None) -> str:
        """Serialize as ``x1,...,xd,weight`` lines after a ``# dims=d`` header."""
        buf = io.StringIO()
        buf.write(f"# dims={self.dims}\n")
        for p, w in zip(self.points, self.weights):
            buf.write(",".join(f"{v:.17g}" for v in (*p, w)) + "\n")
        text = buf.getvalue()
        if target is not None:
            if hasattr(target, "write"):
                target.write(text)
            else:
                with open(target, "w", encoding="utf-8") as fh:
                    fh.write(text)
        return text

    @classmethod
    def from_csv(cls, source) -> "AtomicSignedMeasure":
        if hasattr(source, "read"):
            text = source.read()
        elif isinstance(source, (str, os.PathLike)) and os.path.exists(source):
            with open(source, encoding="utf-8") as fh:
                text = fh.read()
        else:
            text = str(source)
        lines = [ln.strip() for ln in text.splitlines() if ln.strip()]
        if not lines or not lines[0].startswith("# dims="):
            raise ValueError("atom CSV must start with a '# dims=d' header")
        d = int(lines[0].split("=", 1)[1])
        rows = [[float(v) for v in ln.split(",")] for ln in lines[1:]]
        if any(len(r) != d + 1 for r in rows):
            raise ValueError(f"every atom line must have {d + 1} fields")
        arr = np.array(rows, dtype=float).reshape(-1, d + 1)
        return cls(arr[:, :d], arr[:, d], dims=d)

    def __repr__(self) -> str:
        return f"AtomicSignedMeasure(dims={self.dims}, atoms={len(self)})"


class GridField:
    """Function values on the nodes of a :class:`GridMesh`, with a continuity tag."""

    def __init__(self, mesh: GridMesh, values, tag=ContinuityTag.RIGHT,
                 domain: BoxDomain | None = None):
        vals = np.asarray(values, dtype=float)
        if vals.shape != mesh.shape:
            raise ValueError(f"values of shape {vals.shape} do not match mesh {mesh.shape}")
        if not np.all(np.isfinite(vals)):
            raise EvaluationError("grid values must be finite")
        vals.setflags(write=False)
        self.mesh, self.values = mesh, vals
        self.tag = ContinuityTag.parse(tag)
        self.domain = domain

    @property
    def dims(self) -> int:
        return self.mesh.dims

    def _slice(self, subset: SubsetIndex, index: int) -> "GridField":
        if subset.is_full:
            return self
        idx = tuple(slice(None) if i in subset else index for i in range(self.dims))
        dom = self.domain.restrict(subset) if self.domain is not None else None
        return GridField(self.mesh.restrict(subset), self.values[idx], self.tag, dom)

    def slice_lower(self, subset: SubsetIndex) -> "GridField":
        """Lower marginal on the grid: dropped axes pinned to their first node."""
        return self._slice(subset, 0)

    def slice_upper(self, subset: SubsetIndex) -> "GridField":
        """Upper marginal on the grid: dropped axes pinned to their last node."""
        return self._slice(subset, -1)

    def corner(self, side: str = "lower") -> float:
        k = 0 if side == "lower" else -1
        return float(self.values[(k,) * self.dims])

    def cell_deltas(self) -> np.ndarray:
        """Quasi-volume of every cell, by one difference per axis."""
        out = self.values
        for ax in range(self.dims):
            out = np.diff(out, axis=ax)
        return out

    def value_at(self, point) -> float:
        idx = []
        for c, x in zip(self.mesh.coords, np.atleast_1d(point)):
            k = int(np.searchsorted(c, x))
            if k >= c.size or c[k] != x:
                raise DomainError(f"{x} is not a grid coordinate")
            idx.append(k)
        return float(self.values[tuple(idx)])

    def as_function(self) -> TaggedFunction:
        """Piecewise-constant (one-sided tags) or multilinear (continuous) extension."""
        coords, vals, tag = self.mesh.coords, self.values, self.tag
        dom = self.domain or BoxDomain([c[0] for c in coords], [c[-1] for c in coords])
        if tag is ContinuityTag.CONTINUOUS:
            from scipy.interpolate import RegularGridInterpolator
            interp = RegularGridInterpolator(coords, vals, bounds_error=False, fill_value=None)
            return TaggedFunction(lambda x: interp(x), dom, tag, name="grid_field")
        side = "left" if tag is ContinuityTag.LEFT else "right"

        def ev(x):
            idx = tuple(np.clip(np.searchsorted(c, x[:, j], side=side) - 1, 0, c.size - 1)
                        for j, c in enumerate(coords))
            return vals[idx]

        return TaggedFunction(ev, dom, tag, name="grid_field")

    def __repr__(self) -> str:
        return f"GridField({self.mesh.describe()}, tag={self.tag.value})"


def sample(f: TaggedFunction, mesh: GridMesh, scheme: LimitScheme = DEFAULT_SCHEME,
           boundary_continuous: bool = True) -> GridField:
    """Evaluate ``f`` on the nodes of ``mesh``.

    With ``boundary_continuous`` set, nodes on a closed lower face of a
    left-tagged function (or a closed upper face of a right-tagged one) take
    the one-sided limit from inside the domain, so the field satisfies the
    boundary continuity that makes grid measures agree with limit-based
    marginals.
    """
    if mesh.dims != f.dims:
        raise DomainError("mesh dimension differs from the function")
    pts = mesh.points()
    vals = np.empty(pts.shape[0])
    groups = np.zeros(pts.shape[0], dtype=np.int64)
    slot_of = {}
    if boundary_continuous and f.tag in (ContinuityTag.LEFT, ContinuityTag.RIGHT):
        dom = f.domain
        for j in range(f.dims):
            if f.tag is ContinuityTag.LEFT and dom.lower_closed[j]:
                hit, side = pts[:, j] == dom.lower[j], "lower"
            elif f.tag is ContinuityTag.RIGHT and dom.upper_closed[j]:
                hit, side = pts[:, j] == dom.upper[j], "upper"
            else:
                continue
            groups |= hit.astype(np.int64) << j
            slot_of[j] = side
    for g in np.unique(groups):
        rows = np.nonzero(groups == g)[0]
        sub = pts[rows]
        slots = [(j, slot_of[j]) for j in range(f.dims) if g >> j & 1]
        if not slots:
            vals[rows] = f.evaluate(sub)
            continue

        def at(coords, sub=sub):
            q = sub.copy()
            for (j, _), v in coords.items():
                q[:, j] = v
            return f.evaluate(q)

        vals[rows] = _nested_limit(at, slots, _boundary_position(f.domain), scheme,
                                   LimitDivergenceError, f"boundary sampling of {f.name}")
    if not np.all(np.isfinite(vals)):
        bad = pts[np.nonzero(~np.isfinite(vals))[0][0]]
        raise EvaluationError(f"{f.name} is not finite at grid node {tuple(bad)}")
    return GridField(mesh, vals.reshape(mesh.shape), f.tag, f.domain)


class StepFunction(TaggedFunction):
    """``c + sum_J mu_J(orthant of x_J)`` for atomic measures ``mu_J`` on axis subsets.

    A right tag counts atoms ``q <= x`` and a left tag atoms ``q < x``
    componentwise, giving right- or left-continuous step functions.  The
    lower marginal on ``I`` collects the components with ``J`` inside ``I``
    (plus boundary atoms sitting on the lower faces), and its induced
    measure is its top component.
    """

    def __init__(self, components: Mapping, domain: BoxDomain, tag=ContinuityTag.RIGHT,
                 constant: float = 0.0, name: str = "step", grounded: bool | None = None):
        tag = ContinuityTag.parse(tag)
        if tag not in (ContinuityTag.LEFT, ContinuityTag.RIGHT):
            raise TagRequiredError("step functions are left- or right-continuous")
        d = domain.dims
        comps: dict[int, AtomicSignedMeasure] = {}
        for key, m in components.items():
            s = key if isinstance(key, SubsetIndex) else SubsetIndex.from_axes(
                [int(a) for a in (key if isinstance(key, (tuple, list)) else [key])], d)
            if s.is_empty:
                raise ValueError("use the constant for the empty component")
            if m.dims != len(s):
                raise DomainError(f"component {s} needs a {len(s)}-dimensional measure")
            if not m.is_null and not domain.restrict(s).contains(m.points):
                raise DomainError(f"component {s} has atoms outside the domain")
            prev = comps.get(s.mask)
            comps[s.mask] = m if prev is None else prev + m
        self.components = {k: v for k, v in sorted(comps.items()) if not v.is_null}
        self.constant = float(constant)
        bound = abs(self.constant) + sum(m.total_variation() for m in self.components.values())
        super().__init__(self._eval, domain, tag, False, bound, name)
        self.grounded = self._is_grounded() if grounded is None else bool(grounded)

    @classmethod
    def from_measure(cls, measure: AtomicSignedMeasure, domain: BoxDomain, tag="right",
                     constant: float = 0.0, name: str = "step") -> "StepFunction":
        return cls({SubsetIndex.full(domain.dims): measure}, domain, tag, constant, name)

    def _eval(self, x):
        out = np.full(x.shape[0], self.constant)
        strict = self.tag is ContinuityTag.LEFT
        for mask, m in self.components.items():
            axes = SubsetIndex(mask, self.dims).axes
            out = out + kernels.orthant_sum(x[:, axes], m.points, m.weights, strict)
        return out

    def _collapse(self, keep: SubsetIndex, side: str):
        """Components and constant of the marginal keeping the axes of ``keep``."""
        dom = self.domain
        comps: dict[tuple, list] = {}
        const = self.constant
        for mask, m in self.components.items():
            J = SubsetIndex(mask, self.dims)
            jax = J.axes
            sel = np.ones(len(m), dtype=bool)
            for pos, j in enumerate(jax):
                if j in keep:
                    continue
                if side == "lower":
                    sel &= m.points[:, pos] <= dom.lower[j]
                else:
                    sel &= m.points[:, pos] < dom.upper[j]
            kept = [pos for pos, j in enumerate(jax) if j in keep]
            if not kept:
                const += float(m.weights[sel].sum())
                continue
            new_axes = tuple(keep.axes.index(jax[pos]) for pos in kept)
            comps.setdefault(new_axes, []).append((m.points[sel][:, kept], m.weights[sel]))
        return comps, const

    def exact_marginal(self, subset, side):
        comps, const = self._collapse(subset, side)
        dom = self.domain.restrict(subset)
        measures = {}
        for axes, parts in comps.items():
            measures[axes] = AtomicSignedMeasure(np.vstack([p for p, _ in parts]),
                                                 np.concatenate([w for _, w in parts]),
                                                 dims=len(axes))
        return StepFunction(measures, dom, self.tag, const, f"{self.name}_{side}{subset}")

    def exact_corner(self, side):
        return self._collapse(SubsetIndex.empty(self.dims), side)[1]

    def induced_measure(self, subset=None):
        subset = subset or SubsetIndex.full(self.dims)
        g = self if subset.is_full else self.exact_marginal(subset, "lower")
        top = (1 << len(subset)) - 1
        dom = self.domain.restrict(subset)
        m = g.components.get(top)
        if m is None:
            return AtomicSignedMeasure.empty(len(subset), dom)
        return AtomicSignedMeasure(m.points, m.weights, dom, dims=len(subset))

    def _is_grounded(self) -> bool:
        if self.constant != 0.0 and self.dims >= 1:
            return False
        for s in enumerate_subsets(self.dims)[:-1]:
            g = self.exact_marginal(s, "lower")
            if g.constant != 0.0 or g.components:
                return False
        return self.exact_corner("lower") == 0.0


def indicator_ge(c, domain: BoxDomain, tag="right") -> StepFunction:
    """``1{x >= c}`` componentwise (right tag) or ``1{x > c}`` (left tag)."""
    c = np.atleast_1d(np.asarray(c, dtype=float))
    return StepFunction.from_measure(AtomicSignedMeasure.dirac(c), domain, tag,
                                     name="indicator_ge")


def delta(f, box: Box) -> float:
    """Alternating vertex sum of ``f`` over ``box``, sign ``(-1)**(#lower corners)``."""
    d = box.dims
    if d != f.dims:
        raise DomainError("box dimension differs from the function")
    if any(lo == up for lo, up in zip(box.lower, box.upper)):
        # vertices cancel in pairs; skip the float round off
        return 0.0
    verts, signs = [], []
    for choice in itertools.product((0, 1), repeat=d):
        verts.append([box.upper[i] if c else box.lower[i] for i, c in enumerate(choice)])
        signs.append(-1.0 if (d - sum(choice)) % 2 else 1.0)
    verts = np.array(verts)
    if isinstance(f, GridField):
        vals = np.array([f.value_at(v) for v in verts])
    else:
        vals = f.evaluate(verts)
        if not np.all(np.isfinite(vals)):
            bad = verts[np.nonzero(~np.isfinite(vals))[0][0]]
            raise EvaluationError(f"{f.name} is not finite at vertex {tuple(bad)}")
    return float(np.dot(signs, vals))


def d_limit(f: TaggedFunction, box: Box, scheme: LimitScheme = DEFAULT_SCHEME) -> float:
    """Quasi-volume limit over outer boxes ``[a v (x - delta), b ^ (y + eps)]``.

    One-sided offsets that a continuity tag makes redundant are skipped: a
    right-continuous function needs only the lower offsets, a left-continuous
    one only the upper offsets.
    """
    if f.tag is ContinuityTag.CONTINUOUS:
        return delta(f, box)
    dom = f.domain
    slots = []
    for i in range(box.dims):
        if not f.tag.left_continuous and box.lower[i] > dom.lower[i]:
            slots.append((i, "lo"))
        if not f.tag.right_continuous and box.upper[i] < dom.upper[i]:
            slots.append((i, "hi"))
    if not slots:
        return delta(f, box)

    def position(slot, eps):
        i, side = slot
        if side == "lo":
            return max(dom.lower[i], box.lower[i] - eps)
        return min(dom.upper[i], box.upper[i] + eps)

    def at(coords):
        lo, up = list(box.lower), list(box.upper)
        for (i, side), v in coords.items():
            (lo if side == "lo" else up)[i] = v
        return np.array([delta(f, Box(lo, up))])

    return float(_nested_limit(at, slots, position, scheme, LimitDivergenceError,
                               f"quasi-volume limit of {f.name}")[0])


def extract_measure(field: GridField, drop_tol: float = 0.0) -> AtomicSignedMeasure:
    """One atom per cell carrying the cell's quasi-volume.

    Right-continuous (and continuous) fields put it on the cell's upper-right
    node, left-continuous fields on the lower-left node.
    """
    if field.tag is ContinuityTag.UNTAGGED:
        raise TagRequiredError("measure extraction needs a continuity tag")
    masses = field.cell_deltas()
    idx = np.nonzero(np.abs(masses) > drop_tol)
    shift = 0 if field.tag is ContinuityTag.LEFT else 1
    pts = np.column_stack([c[i + shift] for c, i in zip(field.mesh.coords, idx)]) if idx[0].size \
        else np.zeros((0, field.dims))
    return AtomicSignedMeasure(pts, masses[idx], field.domain, drop_tol=drop_tol,
                               dims=field.dims)


def cumulative_field(measure: AtomicSignedMeasure, mesh: GridMesh,
                     tag=ContinuityTag.RIGHT) -> GridField:
    """Grid of ``measure({q <= x})`` (right tag) or ``measure({q < x})`` (left tag)."""
    tag = ContinuityTag.parse(tag)
    vals = measure.mass_below(mesh.points(), strict=tag is ContinuityTag.LEFT)
    return GridField(mesh, vals.reshape(mesh.shape), tag, measure.domain)


@dataclass
class Decomposition:
    """Grid split of the grounded core into two Δ-monotone parts."""

    positive: GridField
    negative: GridField
    masses: np.ndarray

    @property
    def core(self) -> GridField:
        return GridField(self.positive.mesh, self.positive.values - self.negative.values,
                         ContinuityTag.RIGHT)


def _cumulate(masses: np.ndarray) -> np.ndarray:
    out = np.pad(masses, [(1, 0)] * masses.ndim)
    for ax in range(masses.ndim):
        out = np.cumsum(out, axis=ax)
    return out


def decompose(field: GridField) -> Decomposition:
    """Positive and negative cell masses of the grounded core, cumulated from ``a``."""
    if field.tag not in (ContinuityTag.RIGHT, ContinuityTag.CONTINUOUS):
        raise TagRequiredError("decomposition expects a right-continuous field")
    m = field.cell_deltas()
    pos = GridField(field.mesh, _cumulate(np.maximum(m, 0.0)), ContinuityTag.RIGHT, field.domain)
    neg = GridField(field.mesh, _cumulate(np.maximum(-m, 0.0)), ContinuityTag.RIGHT, field.domain)
    return Decomposition(pos, neg, m)


def decompose_marginals(field: GridField) -> dict[SubsetIndex, Decomposition]:
    """Decompose every lower grid marginal, so that
    ``f = f(a) + sum_I (positive_I - negative_I)`` at the nodes."""
    return {s: decompose(field.slice_lower(s)) for s in enumerate_subsets(field.dims)}


def marginal_measure(m: AtomicSignedMeasure, subset: SubsetIndex) -> AtomicSignedMeasure:
    return m.marginal(subset)


def pushforward(m: AtomicSignedMeasure, maps: Sequence[Callable]) -> AtomicSignedMeasure:
    """Image of ``m`` under componentwise maps, required increasing on the atoms."""
    if len(maps) != m.dims:
        raise TransformError("need one map per axis")
    if m.is_null:
        return AtomicSignedMeasure.empty(m.dims)
    cols = []
    for i, phi in enumerate(maps):
        u = np.unique(m.points[:, i])
        v = np.asarray(phi(u), dtype=float)
        if v.shape != u.shape or not np.all(np.isfinite(v)):
            raise TransformError(f"map {i + 1} did not return finite values")
        if np.any(np.diff(v) <= 0):
            raise TransformError(f"map {i + 1} is not strictly increasing on the atoms")
        cols.append(np.asarray(phi(m.points[:, i]), dtype=float))
    return AtomicSignedMeasure(np.column_stack(cols), m.weights, dims=m.dims)


def measure_from_density(rho: Callable, mesh: GridMesh) -> AtomicSignedMeasure:
    """Midpoint rule: one atom per cell at its centre, weight ``rho(centre) * volume``."""
    mids = [0.5 * (c[1:] + c[:-1]) for c in mesh.coords]
    widths = [np.diff(c) for c in mesh.coords]
    grid = np.meshgrid(*mids, indexing="ij")
    pts = np.stack([g.ravel() for g in grid], axis=-1)
    vol = np.ones(1)
    for w in widths:
        vol = np.multiply.outer(vol, w)
    vol = vol.reshape(-1)
    vals = np.asarray(rho(pts), dtype=float).reshape(-1)
    if vals.size == 1 and pts.shape[0] > 1:
        vals = np.full(pts.shape[0], float(vals[0]))
    if not np.all(np.isfinite(vals)):
        bad = pts[np.nonzero(~np.isfinite(vals))[0][0]]
        raise EvaluationError(f"density is not finite at {tuple(bad)}")
    return AtomicSignedMeasure(pts, vals * vol, dims=mesh.dims)


@dataclass
class MeasureInducingReport:
    verdict: str
    hk_sequence: list[float]
    levels: list[int]


def is_measure_inducing(f: TaggedFunction, levels: Sequence[int] = (16, 32, 64),
                        box: Box | None = None, stable_tol: float = 1e-3,
                        growth: float = 1.5) -> MeasureInducingReport:
    """Heuristic verdict from Hardy-Krause variation on refining uniform meshes."""
    from .variation import variation_profile

    levels = [int(n) for n in levels]
    if not levels or any(b <= a for a, b in zip(levels, levels[1:])):
        raise ValueError("levels must be nonempty and strictly increasing")
    seq = [v for _, v in variation_profile(f, levels, box)]
    verdict = "inconclusive"
    if len(seq) >= 2:
        last, prev = seq[-1], seq[-2]
        rel = abs(last - prev) / max(abs(prev), 1e-300) if prev else (0.0 if last == 0 else math.inf)
        ratios = [b / a if a > 0 else math.inf for a, b in zip(seq, seq[1:])][-2:]
        if rel < stable_tol:
            verdict = "inducing"
        elif all(r >= growth for r in ratios):
            verdict = "diverging"
    return MeasureInducingReport(verdict, seq, levels)
