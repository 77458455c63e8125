"""Vitali and Hardy-Krause variation of grid fields."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .domain import Box, GridMesh, SubsetIndex, enumerate_subsets
from .errors import DomainError
from .funcspace import TaggedFunction
from .measures import GridField, sample


@dataclass
class VariationReport:
    vitali: dict[SubsetIndex, float]
    total: float
    mesh: str
    anchor: str = "lower"
    cross_check: float | None = field(default=None)

    def as_rows(self):
        return [(str(s), v) for s, v in self.vitali.items()]


def vitali_variation(f: GridField, subset: SubsetIndex, anchor: str = "lower") -> float:
    """Sum of absolute cell quasi-volumes of the grid marginal on ``subset``."""
    g = f.slice_lower(subset) if anchor == "lower" else f.slice_upper(subset)
    return float(np.abs(g.cell_deltas()).sum())


def hk_variation(f: GridField, anchor: str = "lower", cross_check: bool = False) -> VariationReport:
    """Hardy-Krause variation anchored at the lower grid corner.

    ``cross_check`` additionally computes the value anchored at the upper
    corner; finiteness of the two is equivalent, the numbers usually differ.
    """
    per = {s: vitali_variation(f, s, anchor) for s in enumerate_subsets(f.dims)}
    total = math.fsum(per.values())
    other = None
    if cross_check:
        flip = "upper" if anchor == "lower" else "lower"
        other = math.fsum(vitali_variation(f, s, flip) for s in enumerate_subsets(f.dims))
    return VariationReport(per, total, f.mesh.describe(), anchor, other)


def _uniform_box(f: TaggedFunction, box: Box | None) -> Box:
    if box is not None:
        return box
    if not f.domain.is_bounded:
        raise DomainError("unbounded domain: pass a truncation box")
    return Box(f.domain.lower, f.domain.upper)


def variation_profile(f: TaggedFunction, levels: Sequence[int], box: Box | None = None,
                      anchor: str = "lower") -> list[tuple[int, float]]:
    """HK variation of ``f`` sampled on uniform ``n``-meshes, one value per level."""
    hull = _uniform_box(f, box)
    out = []
    for n in levels:
        mesh = GridMesh.uniform(int(n), hull.lower, hull.upper)
        out.append((int(n), hk_variation(sample(f, mesh), anchor).total))
    return out
