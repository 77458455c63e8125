"""Extending integrals to semi-copulas through staircase discretization.

A semi-copula need not induce a measure, but its composition with a
staircase distribution function on every axis does: ``S_n = S∘(F_n, ...,
F_n)`` is a right-continuous grid function whose quasi-volumes are finitely
many atoms on the lattice of jump points.  The integral of a left-continuous
``g`` against ``S`` is defined as ``pi(g, survival(S))`` and approached by
``psi(g, nu_{S_n})`` as ``n`` grows; :func:`extended_integral` tabulates both.
"""

from __future__ import annotations

import io
import math
import warnings
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from ._text import dump, fmt
from .domain import GridMesh, SubsetIndex, enumerate_subsets
from .errors import DomainError
from .funcspace import (ContinuityTag, DistributionFunction1D, SemiCopulaFamily, TaggedFunction,
                        check_semicopula, lower_marginal, survival)
from .integrate import pi, psi
from .measures import GridField, extract_measure

#: default per-axis cell counts of the quadrature mesh for the limit value
LIMIT_RESOLUTION = {1: 4096, 2: 512, 3: 64}


def staircase_cdf(n: int) -> DistributionFunction1D:
    """Jumps of mass ``1/n`` at ``k/(n+1)``, ``k = 1..n``."""
    if int(n) != n or n < 1:
        raise ValueError("staircase level must be a positive integer")
    n = int(n)
    k = np.arange(1, n + 1)
    return DistributionFunction1D(k / (n + 1), np.full(n, 1.0 / n), cumulative=k / n,
                                  name=f"staircase_{n}")


def discretize_semicopula(S: TaggedFunction, n: int) -> GridField:
    """``S∘(F_n, ..., F_n)`` sampled on ``{0, 1/(n+1), ..., n/(n+1), 1}^d``.

    The grid holds every jump point, so the extracted measure is exact.
    """
    n = int(n)
    if n < 1:
        raise ValueError("level must be positive")
    k = np.arange(n + 1)
    nodes = np.append(k / (n + 1), 1.0)
    levels = np.append(k / n, 1.0)
    d = S.dims
    grids = np.meshgrid(*([levels] * d), indexing="ij")
    u = np.stack([g.ravel() for g in grids], axis=-1)
    vals = S.evaluate(u).reshape((n + 2,) * d)
    mesh = GridMesh([nodes] * d)
    return GridField(mesh, vals, ContinuityTag.RIGHT, S.domain)


@dataclass
class ConvergenceTable:
    levels: list[int]
    values: list[float]
    limit: float
    residuals: list[float]
    warnings: list[str] = field(default_factory=list)
    truncation: dict | None = None

    def rows(self):
        return list(zip(self.levels, self.values, self.residuals))

    def to_csv(self, target=None) -> str:
        buf = io.StringIO()
        buf.write("n,psi,residual\n")
        for n, v, r in self.rows():
            buf.write(f"{n},{fmt(v)},{fmt(r)}\n")
        text = buf.getvalue()
        if target is not None:
            if hasattr(target, "write"):
                target.write(text)
            else:
                with open(target, "w", encoding="utf-8") as fh:
                    fh.write(text)
        return text

    def to_dict(self) -> dict:
        return {"levels": self.levels, "values": self.values, "limit": self.limit,
                "residuals": self.residuals, "warnings": self.warnings,
                "truncation": self.truncation}

    def to_text(self) -> str:
        return dump(self.to_dict())


def diagonal_probe(g: TaggedFunction, points: int = 1024) -> dict[SubsetIndex, float]:
    """Midpoint estimates of ``int_0^1 g_I(u, ..., u) du`` for every nonempty ``I``.

    Raises ``FloatingPointError`` when two resolutions disagree markedly or a
    value is not finite, which signals that the diagonal integral may not
    exist.
    """
    out = {}
    for s in enumerate_subsets(g.dims):
        gi = g if s.is_full else lower_marginal(g, s)
        ests = []
        for m in (points, 2 * points):
            t = (np.arange(m) + 0.5) / m
            vals = gi.evaluate(np.repeat(t[:, None], len(s), axis=1))
            ests.append(float(np.mean(vals)))
        if not all(map(math.isfinite, ests)) or abs(ests[1] - ests[0]) > 1e-3 * (1 + abs(ests[0])):
            raise FloatingPointError(f"diagonal integral of the marginal {s} does not settle "
                                     f"({ests[0]:.6g} vs {ests[1]:.6g})")
        out[s] = ests[1]
    return out


def survival_integral(g: TaggedFunction, S: TaggedFunction, resolution: int | None = None) -> float:
    """``pi(g, survival(S))`` on a uniform quadrature mesh of ``[0,1]^d``.

    Marginal measures of ``g`` come from its density when it has one and
    from quasi-volume extraction otherwise.
    """
    d = g.dims
    n = resolution or LIMIT_RESOLUTION.get(d, 16)
    mesh = GridMesh.unit(n, d)
    method = "density" if g.density(SubsetIndex.full(d)) is not None else "auto"
    return pi(g, survival(S), mesh, method).total


def extended_integral(g: TaggedFunction, S: TaggedFunction, levels: Sequence[int],
                      resolution: int | None = None) -> ConvergenceTable:
    """Tabulate ``psi(g, nu_{S_n})`` over ``levels`` against ``pi(g, survival(S))``."""
    levels = [int(n) for n in levels]
    if not levels or any(b <= a for a, b in zip(levels, levels[1:])) or levels[0] < 1:
        raise ValueError("levels must be nonempty, positive and strictly increasing")
    if g.dims != S.dims:
        raise DomainError("integrand and semi-copula differ in dimension")
    notes = []
    if not g.tag.left_continuous:
        notes.append(f"{g.name} is not tagged left-continuous")
    try:
        diagonal_probe(g)
    except FloatingPointError as exc:
        notes.append(f"integrability: {exc}")
        warnings.warn(str(exc), RuntimeWarning, stacklevel=2)
    values = [psi(g, extract_measure(discretize_semicopula(S, n))) for n in levels]
    limit = survival_integral(g, S, resolution)
    residuals = [abs(v - limit) for v in values]
    return ConvergenceTable(levels, values, limit, residuals, notes, None)


@dataclass
class LipschitzBoundReport:
    max_ratio: float
    witness: tuple[float, ...] | None
    lipschitz: float
    constant: float


def lipschitz_survival_bound(S: TaggedFunction, mesh: GridMesh,
                             lipschitz: float | None = None) -> LipschitzBoundReport:
    """Largest ``|survival(S)(u)| / ((L 2^(d-2) + 1)(1 - max u))`` over nodes with ``max u < 1``."""
    d = S.dims
    L = lipschitz
    if L is None:
        L = getattr(S, "lipschitz", None)
    if L is None:
        L = check_semicopula(S, mesh).lipschitz_L
    c = L * 2.0 ** (d - 2) + 1.0
    pts = mesh.points()
    gap = 1.0 - pts.max(axis=1)
    keep = gap > 0
    pts, gap = pts[keep], gap[keep]
    if pts.shape[0] == 0:
        return LipschitzBoundReport(0.0, None, float(L), c)
    ratio = np.abs(survival(S).evaluate(pts)) / (c * gap)
    k = int(np.argmax(ratio))
    return LipschitzBoundReport(float(ratio[k]), tuple(float(v) for v in pts[k]), float(L), c)


__all__ = ["ConvergenceTable", "LipschitzBoundReport", "diagonal_probe",
           "discretize_semicopula", "extended_integral", "lipschitz_survival_bound",
           "staircase_cdf", "survival_integral"]
