"""Build functions, semi-copulas and distribution functions from JSON documents.

A function spec looks like::

    {"family": "indicator_ge", "params": {"c": [1.0]},
     "domain": {"lower": [0], "upper": [2]},
     "tag": "right", "grounded": true, "bounded": 1}

``domain`` may give ``lower``/``upper`` lists (``"inf"``/``"-inf"`` allowed)
and optional ``lower_closed``/``upper_closed`` flags; when absent the unit
cube of dimension ``params.dims`` is used.
"""

from __future__ import annotations

import json
import math
import os
from typing import Any

import numpy as np

from .domain import BoxDomain, GridMesh, SubsetIndex
from .errors import DomainError, SpecError
from .funcspace import (ContinuityTag, DistributionFunction1D, Polynomial, SemiCopulaFamily,
                        TaggedFunction)
from .measures import AtomicSignedMeasure, GridField, StepFunction

FAMILIES = ("independence", "upper_frechet", "lower_frechet", "convex_combination",
            "indicator_ge", "indicator_halfspace", "polynomial", "product_minus",
            "custom_grid", "step", "random_step")

#: families whose values depend on a left/right choice at jumps
TAG_REQUIRED = ("indicator_ge", "indicator_halfspace", "custom_grid", "step", "random_step")


def load_document(source) -> dict:
    """Parse a spec from a path, a JSON string or an already-decoded mapping."""
    if isinstance(source, dict):
        return source
    try:
        if isinstance(source, (str, os.PathLike)) and os.path.exists(source):
            with open(source, encoding="utf-8") as fh:
                doc = json.load(fh)
        else:
            doc = json.loads(str(source))
    except (OSError, json.JSONDecodeError) as exc:
        raise SpecError(f"cannot read spec: {exc}") from exc
    if not isinstance(doc, dict):
        raise SpecError("a spec must be a JSON object")
    return doc


def _domain(doc: dict, dims: int | None) -> BoxDomain:
    raw = doc.get("domain")
    if raw is None:
        if dims is None:
            raise SpecError("spec needs a domain or params.dims")
        return BoxDomain.unit(dims)
    if not isinstance(raw, dict) or "lower" not in raw or "upper" not in raw:
        raise SpecError("domain needs 'lower' and 'upper' lists")
    try:
        return BoxDomain(raw["lower"], raw["upper"], raw.get("lower_closed"),
                         raw.get("upper_closed"))
    except (DomainError, TypeError, ValueError) as exc:
        raise SpecError(f"invalid domain: {exc}") from exc


def _dims_hint(doc: dict) -> int | None:
    p = doc.get("params") or {}
    if "dims" in p:
        return int(p["dims"])
    if "c" in p and isinstance(p["c"], list):
        return len(p["c"])
    return None


def _semicopula(family: str, params: dict, dims: int) -> SemiCopulaFamily:
    if family == "independence":
        return SemiCopulaFamily.independence(dims)
    if family == "upper_frechet":
        return SemiCopulaFamily.upper_frechet(dims)
    if family == "lower_frechet":
        return SemiCopulaFamily.lower_frechet(dims)
    members = [_semicopula(m, {}, dims) for m in params["members"]]
    return SemiCopulaFamily.convex_combination(params["weights"], members)


def random_step(dims: int, atoms: int, seed: int, domain: BoxDomain, tag: str = "left",
                grounded: bool = False) -> StepFunction:
    """Seeded step function with general-position atoms inside ``domain``.

    Grounded fixtures carry only the full-dimensional component; otherwise
    every axis subset gets its own atoms and a random constant is added.
    """
    rng = np.random.default_rng(seed)
    lo = np.array([a if math.isfinite(a) else 0.0 for a in domain.lower])
    hi = np.array([b if math.isfinite(b) else lo[i] + 2.0 for i, b in enumerate(domain.upper)])
    span = hi - lo
    comps = {}
    subsets = [SubsetIndex.full(dims)] if grounded else \
        [SubsetIndex(m, dims) for m in range(1, 1 << dims)]
    for s in subsets:
        ax = list(s.axes)
        p = lo[ax] + span[ax] * rng.uniform(0.02, 0.98, size=(atoms, len(ax)))
        comps[s] = AtomicSignedMeasure(p, rng.normal(size=atoms), dims=len(ax))
    const = 0.0 if grounded else float(rng.normal())
    return StepFunction(comps, domain, tag, const, name=f"random_step({seed})")


def build_function(source, seed: int | None = None) -> TaggedFunction:
    """Instantiate the function described by a spec document."""
    doc = load_document(source)
    family = doc.get("family")
    if family not in FAMILIES:
        raise SpecError(f"unknown family {family!r}; expected one of {', '.join(FAMILIES)}")
    params = doc.get("params") or {}
    if not isinstance(params, dict):
        raise SpecError("params must be an object")
    try:
        tag = ContinuityTag.parse(doc.get("tag"))
    except ValueError as exc:
        raise SpecError(str(exc)) from exc
    try:
        fn = _build(family, params, doc, tag, seed)
    except SpecError:
        raise
    except (KeyError, TypeError, ValueError, IndexError) as exc:
        raise SpecError(f"invalid parameters for {family}: {exc}") from exc
    if "tag" not in doc and family in TAG_REQUIRED:
        # keep the values but make the missing declaration visible downstream
        fn = TaggedFunction(fn.evaluate, fn.domain, ContinuityTag.UNTAGGED, fn.grounded,
                            fn.bound, fn.name, fn.params)
    if "grounded" in doc:
        fn.grounded = bool(doc["grounded"])
    if "bounded" in doc:
        b = doc["bounded"]
        fn.bound = None if b is None or b is False else float(b)
    return fn


def _build(family, params, doc, tag, seed) -> TaggedFunction:
    dims = _dims_hint(doc)
    if family in ("independence", "upper_frechet", "lower_frechet", "convex_combination"):
        d = dims or (len(doc["domain"]["lower"]) if "domain" in doc else 2)
        return _semicopula(family, params, d)
    if family == "indicator_ge":
        dom = _domain(doc, dims)
        c = np.asarray(params["c"], dtype=float).reshape(-1)
        if c.size != dom.dims:
            raise SpecError("indicator_ge needs one threshold per axis")
        t = "left" if tag is ContinuityTag.LEFT else "right"
        return StepFunction.from_measure(AtomicSignedMeasure.dirac(c), dom, t,
                                         name="indicator_ge")
    if family == "indicator_halfspace":
        dom = _domain(doc, dims or 2)
        c = float(params["c"])
        if tag is ContinuityTag.LEFT:
            return TaggedFunction(lambda x: (x.sum(axis=1) > c) * 1.0, dom, tag, bound=1.0,
                                  name="indicator_halfspace", params=params)
        return TaggedFunction(lambda x: (x.sum(axis=1) >= c) * 1.0, dom,
                              tag if tag.one_sided else ContinuityTag.RIGHT, bound=1.0,
                              name="indicator_halfspace", params=params)
    if family in ("polynomial", "product_minus"):
        if family == "product_minus":
            terms = [(1.0, (1, 1)), (-1.0, (1, 0))]
            dom = _domain(doc, 2) if "domain" in doc else BoxDomain.positive_orthant(2)
        else:
            terms = [(float(t["coef"]), tuple(int(p) for p in t["powers"]))
                     for t in params["terms"]]
            dom = _domain(doc, len(terms[0][1]))
        return Polynomial(terms, dom, tag if tag.one_sided else ContinuityTag.CONTINUOUS,
                          name=family)
    if family == "custom_grid":
        mesh = GridMesh(params["coords"])
        field = GridField(mesh, np.asarray(params["values"], dtype=float),
                          tag if tag.one_sided else ContinuityTag.RIGHT)
        fn = field.as_function()
        if "domain" in doc:
            fn.domain = _domain(doc, mesh.dims)
        fn.name, fn.params = "custom_grid", {}
        fn.grid = field
        return fn
    if family == "step":
        dom = _domain(doc, dims)
        comps = {}
        for comp in params["components"]:
            axes = [int(a) - 1 for a in comp["axes"]]
            rows = np.asarray(comp["atoms"], dtype=float).reshape(-1, len(axes) + 1)
            comps[tuple(axes)] = AtomicSignedMeasure(rows[:, :-1], rows[:, -1], dims=len(axes))
        t = "left" if tag is ContinuityTag.LEFT else "right"
        return StepFunction(comps, dom, t, float(params.get("constant", 0.0)))
    if family == "random_step":
        d = int(params["dims"])
        dom = _domain(doc, d)
        s = int(params.get("seed", 0)) if seed is None else int(seed) + int(params.get("offset", 0))
        t = "left" if tag is ContinuityTag.LEFT else "right"
        return random_step(d, int(params.get("atoms", 4)), s, dom, t,
                           bool(doc.get("grounded", params.get("grounded", False))))
    raise SpecError(f"unhandled family {family!r}")


def build_distributions(source) -> list[DistributionFunction1D]:
    """Parse ``{"marginals": [{"points": [...], "masses": [...]} | "uniform", ...]}``."""
    doc = load_document(source)
    items = doc.get("marginals")
    if not isinstance(items, list) or not items:
        raise SpecError("'marginals' must be a nonempty list")
    out = []
    for it in items:
        try:
            if it == "uniform":
                out.append(DistributionFunction1D.uniform())
                continue
            dom = None
            if "domain" in it:
                dom = BoxDomain([it["domain"][0]], [it["domain"][1]])
            out.append(DistributionFunction1D(it["points"], it["masses"], domain=dom))
        except (KeyError, TypeError, ValueError, DomainError) as exc:
            raise SpecError(f"invalid marginal {it!r}: {exc}") from exc
    return out


def describe(fn: Any) -> dict:
    return {"name": getattr(fn, "name", "?"), "dims": fn.dims, "tag": fn.tag.value,
            "grounded": fn.grounded, "bound": fn.bound}
