"""Box domains, rectangular grids and coordinate subsets.

A domain is a Cartesian product of intervals, each endpoint either finite
(open or closed) or infinite (always open).  Subsets of the coordinate axes
are encoded as bitmasks so that sums over all subsets run in a fixed,
reproducible order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import reduce
from typing import Iterator, Sequence

import numpy as np

from .errors import DimensionError, DomainError, InvalidSubsetError

MAX_DIMS = 16


def _check_dims(d: int) -> None:
    if not isinstance(d, (int, np.integer)) or not 1 <= d <= MAX_DIMS:
        raise DimensionError(f"dimension must be an integer in [1, {MAX_DIMS}], got {d!r}")


@dataclass(frozen=True, order=True)
class SubsetIndex:
    """Subset of ``{1, ..., dims}`` stored as a bitmask (bit ``i`` is axis ``i+1``)."""

    mask: int
    dims: int

    def __post_init__(self):
        _check_dims(self.dims)
        if self.mask < 0 or self.mask >> self.dims:
            raise InvalidSubsetError(f"mask {self.mask:#b} has bits beyond axis {self.dims}")

    @classmethod
    def from_axes(cls, axes: Sequence[int], dims: int) -> "SubsetIndex":
        """Build from zero-based axis indices."""
        mask = 0
        for a in axes:
            if not 0 <= a < dims:
                raise InvalidSubsetError(f"axis {a} outside 0..{dims - 1}")
            mask |= 1 << a
        return cls(mask, dims)

    @classmethod
    def full(cls, dims: int) -> "SubsetIndex":
        return cls((1 << dims) - 1, dims)

    @classmethod
    def empty(cls, dims: int) -> "SubsetIndex":
        return cls(0, dims)

    @property
    def axes(self) -> tuple[int, ...]:
        """Zero-based axes contained in the subset, ascending."""
        return tuple(i for i in range(self.dims) if self.mask >> i & 1)

    @property
    def complement(self) -> "SubsetIndex":
        return SubsetIndex(((1 << self.dims) - 1) ^ self.mask, self.dims)

    @property
    def is_empty(self) -> bool:
        return self.mask == 0

    @property
    def is_full(self) -> bool:
        return self.mask == (1 << self.dims) - 1

    def issubset(self, other: "SubsetIndex") -> bool:
        return self.mask & ~other.mask == 0

    def __len__(self) -> int:
        return bin(self.mask).count("1")

    def __contains__(self, axis: int) -> bool:
        return bool(self.mask >> axis & 1)

    def __iter__(self):
        return iter(self.axes)

    def __str__(self) -> str:
        return "{" + ",".join(str(a + 1) for a in self.axes) + "}"


def enumerate_subsets(d: int, include_empty: bool = False) -> list[SubsetIndex]:
    """All subsets of ``{1..d}`` in increasing bitmask order."""
    _check_dims(d)
    start = 0 if include_empty else 1
    return [SubsetIndex(m, d) for m in range(start, 1 << d)]


def _as_bound(v) -> float:
    if isinstance(v, str):
        v = float(v.replace("infinity", "inf"))
    return float(v)


@dataclass(frozen=True)
class BoxDomain:
    """Product of intervals with per-endpoint closedness flags."""

    lower: tuple[float, ...]
    upper: tuple[float, ...]
    lower_closed: tuple[bool, ...]
    upper_closed: tuple[bool, ...]

    def __init__(self, lower, upper, lower_closed=None, upper_closed=None):
        lo = tuple(_as_bound(v) for v in lower)
        up = tuple(_as_bound(v) for v in upper)
        if len(lo) != len(up):
            raise DomainError("lower and upper bounds differ in length")
        _check_dims(len(lo))
        lc = tuple(bool(c) for c in lower_closed) if lower_closed is not None else tuple(
            math.isfinite(v) for v in lo)
        uc = tuple(bool(c) for c in upper_closed) if upper_closed is not None else tuple(
            math.isfinite(v) for v in up)
        if len(lc) != len(lo) or len(uc) != len(lo):
            raise DomainError("closedness flags must match the dimension")
        for i, (a, b) in enumerate(zip(lo, up)):
            if math.isnan(a) or math.isnan(b) or not a < b:
                raise DomainError(f"axis {i + 1}: need a < b, got [{a}, {b}]")
            if (lc[i] and not math.isfinite(a)) or (uc[i] and not math.isfinite(b)):
                raise DomainError(f"axis {i + 1}: infinite endpoints cannot be closed")
        object.__setattr__(self, "lower", lo)
        object.__setattr__(self, "upper", up)
        object.__setattr__(self, "lower_closed", lc)
        object.__setattr__(self, "upper_closed", uc)

    @classmethod
    def unit(cls, d: int) -> "BoxDomain":
        """The closed unit cube ``[0,1]^d``."""
        return cls([0.0] * d, [1.0] * d)

    @classmethod
    def positive_orthant(cls, d: int) -> "BoxDomain":
        """``[0, inf)^d``."""
        return cls([0.0] * d, [math.inf] * d)

    @property
    def dims(self) -> int:
        return len(self.lower)

    @property
    def is_bounded(self) -> bool:
        return all(map(math.isfinite, self.lower + self.upper))

    def restrict(self, subset: SubsetIndex) -> "BoxDomain":
        """The factor domain on the axes of ``subset``."""
        if subset.is_empty:
            raise InvalidSubsetError("cannot restrict a domain to the empty subset")
        ax = subset.axes
        return BoxDomain([self.lower[i] for i in ax], [self.upper[i] for i in ax],
                         [self.lower_closed[i] for i in ax], [self.upper_closed[i] for i in ax])

    def contains(self, x) -> bool:
        x = np.asarray(x, dtype=float)
        for i in range(self.dims):
            lo_ok = x[..., i] >= self.lower[i] if self.lower_closed[i] else x[..., i] > self.lower[i]
            up_ok = x[..., i] <= self.upper[i] if self.upper_closed[i] else x[..., i] < self.upper[i]
            if not np.all(lo_ok & up_ok):
                return False
        return True

    def to_dict(self) -> dict:
        return {"lower": list(self.lower), "upper": list(self.upper),
                "lower_closed": list(self.lower_closed), "upper_closed": list(self.upper_closed)}


@dataclass(frozen=True)
class Box:
    """Closed box ``[lower, upper]`` with finite corners."""

    lower: tuple[float, ...]
    upper: tuple[float, ...]

    def __init__(self, lower, upper):
        lo = tuple(float(v) for v in np.atleast_1d(lower))
        up = tuple(float(v) for v in np.atleast_1d(upper))
        if len(lo) != len(up):
            raise DomainError("box corners differ in length")
        if not all(math.isfinite(v) for v in lo + up):
            raise DomainError("box corners must be finite")
        if any(a > b for a, b in zip(lo, up)):
            raise DomainError(f"box corners not ordered: {lo} vs {up}")
        object.__setattr__(self, "lower", lo)
        object.__setattr__(self, "upper", up)

    @property
    def dims(self) -> int:
        return len(self.lower)

    @property
    def volume(self) -> float:
        return float(np.prod(np.subtract(self.upper, self.lower)))


@dataclass(frozen=True)
class GridMesh:
    """Rectangular grid given by one strictly increasing coordinate array per axis."""

    coords: tuple[np.ndarray, ...]

    def __init__(self, coords):
        if isinstance(coords, np.ndarray) and coords.ndim == 1:
            coords = [coords]
        arrs = []
        for i, c in enumerate(coords):
            a = np.array(c, dtype=float).ravel()
            if a.size < 2:
                raise DomainError(f"axis {i + 1}: a mesh needs at least two coordinates")
            if not np.all(np.isfinite(a)) or not np.all(np.diff(a) > 0):
                raise DomainError(f"axis {i + 1}: coordinates must be finite and strictly increasing")
            a.setflags(write=False)
            arrs.append(a)
        _check_dims(len(arrs))
        object.__setattr__(self, "coords", tuple(arrs))

    @classmethod
    def uniform(cls, n: int, lower, upper) -> "GridMesh":
        """``n`` equal cells per axis on the box ``[lower, upper]``."""
        lower, upper = np.atleast_1d(lower), np.atleast_1d(upper)
        return cls([np.linspace(a, b, n + 1) for a, b in zip(lower, upper)])

    @classmethod
    def unit(cls, n: int, d: int) -> "GridMesh":
        return cls.uniform(n, [0.0] * d, [1.0] * d)

    @property
    def dims(self) -> int:
        return len(self.coords)

    @property
    def shape(self) -> tuple[int, ...]:
        return tuple(c.size for c in self.coords)

    @property
    def hull(self) -> Box:
        return Box([c[0] for c in self.coords], [c[-1] for c in self.coords])

    def restrict(self, subset: SubsetIndex) -> "GridMesh":
        if subset.is_empty:
            raise InvalidSubsetError("cannot restrict a mesh to the empty subset")
        return GridMesh([self.coords[i] for i in subset.axes])

    def points(self) -> np.ndarray:
        """All nodes as an array of shape ``(prod(shape), dims)`` in C order."""
        grids = np.meshgrid(*self.coords, indexing="ij")
        return np.stack([g.ravel() for g in grids], axis=-1)

    def describe(self) -> str:
        return "x".join(str(n) for n in self.shape) + " nodes"

    def __eq__(self, other):
        if not isinstance(other, GridMesh) or other.dims != self.dims:
            return NotImplemented
        return all(np.array_equal(a, b) for a, b in zip(self.coords, other.coords))

    def __hash__(self):
        return hash(tuple(c.tobytes() for c in self.coords))


def cells(mesh: GridMesh, subset: SubsetIndex) -> Iterator[Box]:
    """Yield the grid cells of ``mesh`` restricted to the axes of ``subset``."""
    if subset.is_empty:
        raise InvalidSubsetError("cells() needs a nonempty subset")
    if subset.dims != mesh.dims:
        raise InvalidSubsetError("subset and mesh dimensions differ")
    cs = [mesh.coords[i] for i in subset.axes]
    for idx in np.ndindex(*(c.size - 1 for c in cs)):
        yield Box([c[k] for c, k in zip(cs, idx)], [c[k + 1] for c, k in zip(cs, idx)])


def cell_count(mesh: GridMesh, subset: SubsetIndex) -> int:
    return reduce(lambda acc, i: acc * (mesh.coords[i].size - 1), subset.axes, 1)


def refine(mesh: GridMesh, factor: int) -> GridMesh:
    """Split every cell on every axis into ``factor`` equal parts."""
    if int(factor) != factor or factor < 1:
        raise ValueError("refinement factor must be a positive integer")
    factor = int(factor)
    if factor == 1:
        return mesh
    out = []
    t = np.arange(factor) / factor
    for c in mesh.coords:
        inner = (c[:-1, None] + np.diff(c)[:, None] * t[None, :]).ravel()
        out.append(np.append(inner, c[-1]))
    return GridMesh(out)
