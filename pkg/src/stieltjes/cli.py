"""Command-line front end.

Every command reads JSON function specs (see :mod:`stieltjes.specs`) and
prints either CSV or a JSON-shaped text report.  Floats carry 17
significant digits so that runs can be diffed byte for byte.

Exit codes
----------
0   success (``check``: the function looks measure inducing)
1   ``ibp``/``transform`` residual above ``--tol``; ``reproduce-paper`` failure
2   ``check``: the variation diverges
3   ``check``: inconclusive
64  unreadable spec or invalid arguments
65  the hypotheses of the requested identity are not met
"""

from __future__ import annotations

import argparse
import csv
import io
import math
import sys
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from ._text import dump, fmt
from .domain import BoxDomain, GridMesh, SubsetIndex
from .errors import (DomainError, HypothesisError, LimitDivergenceError, SpecError, StieltjesError,
                     TagRequiredError)
from .extend import extended_integral
from .funcspace import (SemiCopulaFamily, TaggedFunction, check_semicopula, lower_marginal,
                        survival, upper_marginal)
from .integrate import ibp_check, marginal_measure_of, psi, transform_check
from .measures import (AtomicSignedMeasure, StepFunction, decompose, extract_measure,
                       is_measure_inducing, sample)
from .specs import build_distributions, build_function
from .variation import hk_variation, variation_profile

EXIT_OK, EXIT_FAIL, EXIT_DIVERGING, EXIT_INCONCLUSIVE = 0, 1, 2, 3
EXIT_USAGE, EXIT_HYPOTHESIS = 64, 65

COMMANDS = ("check", "variation", "integrate", "ibp", "transform", "extend", "decompose",
            "reproduce-paper")


class UsageError(Exception):
    pass


@dataclass
class RunConfig:
    command: str
    specs: list[str] = field(default_factory=list)
    levels: list[int] = field(default_factory=lambda: [16, 32, 64])
    mesh: int | None = None
    tol: float = 1e-10
    out: str | None = None
    format: str = "text"
    seed: int | None = None
    marginals: str | None = None

    def validate(self) -> "RunConfig":
        if self.command not in COMMANDS:
            raise UsageError(f"unknown command {self.command!r}")
        if not self.tol > 0:
            raise UsageError("--tol must be positive")
        if not self.levels:
            raise UsageError("--levels must not be empty")
        if any(n < 1 for n in self.levels) or any(b <= a for a, b in zip(self.levels, self.levels[1:])):
            raise UsageError("--levels must be positive and strictly increasing")
        if self.mesh is not None and self.mesh < 1:
            raise UsageError("--mesh must be positive")
        if self.format not in ("csv", "text"):
            raise UsageError("--format is csv or text")
        return self


def _levels(text: str) -> list[int]:
    if text is None or not text.strip():
        return []
    try:
        return [int(t) for t in text.split(",") if t.strip()]
    except ValueError as exc:
        raise UsageError(f"bad --levels {text!r}") from exc


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--mesh", type=int, default=None, help="cells per axis")
    common.add_argument("--levels", default="16,32,64", help="comma separated mesh levels")
    common.add_argument("--tol", type=float, default=1e-10)
    common.add_argument("--out", default=None, help="output path (prefix for decompose)")
    common.add_argument("--format", choices=("csv", "text"), default="text")
    common.add_argument("--seed", type=int, default=None, help="seed for random_step specs")

    p = _Parser(prog="stieltjes", description="Lebesgue-Stieltjes integration toolkit")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)
    one = {"check": "verdict from Hardy-Krause variation on refining meshes",
           "variation": "Hardy-Krause variation table",
           "decompose": "split the grounded core into positive and negative parts"}
    for name, text in one.items():
        c = sub.add_parser(name, parents=[common], help=text)
        c.add_argument("spec")
    for name, a, b, text in (("integrate", "integrand", "integrator", "psi(integrand, nu)"),
                             ("ibp", "g", "h", "integration by parts check"),
                             ("transform", "g", "h", "quantile transformation check"),
                             ("extend", "g", "semicopula", "staircase extension table")):
        c = sub.add_parser(name, parents=[common], help=text)
        c.add_argument(a)
        c.add_argument(b)
        if name == "transform":
            c.add_argument("--marginals", required=True, help="JSON with marginal cdfs")
    sub.add_parser("reproduce-paper", parents=[common], help="run the worked-example fixtures")
    return p


def config_from_args(argv: Sequence[str] | None = None) -> RunConfig:
    ns = build_parser().parse_args(argv)
    specs = [getattr(ns, k) for k in ("spec", "integrand", "integrator", "g", "h", "semicopula")
             if getattr(ns, k, None) is not None]
    return RunConfig(ns.command, specs, _levels(ns.levels), ns.mesh, ns.tol, ns.out, ns.format,
                     ns.seed, getattr(ns, "marginals", None)).validate()


def _emit(cfg: RunConfig, text: str, stdout) -> None:
    if not text.endswith("\n"):
        text += "\n"
    if cfg.out and cfg.command != "decompose":
        with open(cfg.out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        stdout.write(text)


def _csv(header: Sequence[str], rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")  # quotes labels such as "term {1,2}"
    w.writerow(header)
    for r in rows:
        w.writerow([v if isinstance(v, str) else fmt(v) if isinstance(v, float) else str(v)
                    for v in r])
    return buf.getvalue()


def _mesh_for(f: TaggedFunction, n: int | None) -> GridMesh | None:
    if n is None:
        return None
    if not f.domain.is_bounded:
        raise UsageError("--mesh needs a bounded domain")
    return GridMesh.uniform(n, f.domain.lower, f.domain.upper)


_VERDICT_CODES = {"inducing": EXIT_OK, "diverging": EXIT_DIVERGING,
                  "inconclusive": EXIT_INCONCLUSIVE}


def cmd_check(cfg: RunConfig, stdout) -> int:
    f = build_function(cfg.specs[0], cfg.seed)
    rep = is_measure_inducing(f, cfg.levels)
    if cfg.format == "csv":
        text = _csv(("n", "hk", "verdict"),
                    [(n, float(v), rep.verdict) for n, v in zip(rep.levels, rep.hk_sequence)])
    else:
        text = dump({"verdict": rep.verdict, "levels": rep.levels, "hk": rep.hk_sequence})
    _emit(cfg, text, stdout)
    if cfg.out:
        stdout.write(f"verdict: {rep.verdict}\n")
    return _VERDICT_CODES[rep.verdict]


def cmd_variation(cfg: RunConfig, stdout) -> int:
    f = build_function(cfg.specs[0], cfg.seed)
    prof = variation_profile(f, cfg.levels)
    if cfg.format == "csv":
        text = _csv(("n", "hk"), [(n, float(v)) for n, v in prof])
    else:
        text = dump({"levels": [n for n, _ in prof], "hk": [float(v) for _, v in prof]})
    _emit(cfg, text, stdout)
    return EXIT_OK


def cmd_integrate(cfg: RunConfig, stdout) -> int:
    f = build_function(cfg.specs[0], cfg.seed)
    g = build_function(cfg.specs[1], cfg.seed)
    nu = marginal_measure_of(g, SubsetIndex.full(g.dims), _mesh_for(g, cfg.mesh))
    value = psi(f, nu)
    if cfg.format == "csv":
        text = _csv(("psi", "atoms"), [(value, len(nu))])
    else:
        text = dump({"psi": value, "atoms": len(nu)})
    _emit(cfg, text, stdout)
    return EXIT_OK


def cmd_ibp(cfg: RunConfig, stdout) -> int:
    g = build_function(cfg.specs[0], cfg.seed)
    h = build_function(cfg.specs[1], cfg.seed)
    rep = ibp_check(g, h, _mesh_for(g, cfg.mesh))
    if cfg.format == "csv":
        rows = [(f"term {k}", float(v)) for k, v in rep.breakdown.terms.items()]
        rows += [("corner", rep.breakdown.corner), ("lhs", rep.lhs), ("rhs", rep.rhs),
                 ("residual", rep.residual), ("flags", ";".join(rep.flags))]
        text = _csv(("quantity", "value"), rows)
    else:
        text = rep.to_text()
    _emit(cfg, text, stdout)
    return EXIT_OK if rep.residual < cfg.tol else EXIT_FAIL


def cmd_transform(cfg: RunConfig, stdout) -> int:
    if not cfg.marginals:
        raise UsageError("transform needs --marginals")
    g = build_function(cfg.specs[0], cfg.seed)
    h = build_function(cfg.specs[1], cfg.seed)
    Fs = build_distributions(cfg.marginals)
    rep = transform_check(g, Fs, h)
    if cfg.format == "csv":
        text = _csv(("lhs", "rhs", "residual", "flags"),
                    [(rep.lhs, rep.rhs, rep.residual, ";".join(rep.flags))])
    else:
        text = rep.to_text()
    _emit(cfg, text, stdout)
    return EXIT_OK if rep.residual < cfg.tol else EXIT_FAIL


def cmd_extend(cfg: RunConfig, stdout) -> int:
    g = build_function(cfg.specs[0], cfg.seed)
    S = build_function(cfg.specs[1], cfg.seed)
    table = extended_integral(g, S, cfg.levels)
    text = table.to_csv() if cfg.format == "csv" or cfg.out else table.to_text()
    _emit(cfg, text, stdout)
    if cfg.out:
        stdout.write(f"limit: {fmt(table.limit)}\n")
    return EXIT_OK


def cmd_decompose(cfg: RunConfig, stdout) -> int:
    f = build_function(cfg.specs[0], cfg.seed)
    if not cfg.out:
        raise UsageError("decompose needs --out PREFIX")
    n = cfg.mesh or 64
    if not f.domain.is_bounded:
        raise UsageError("decompose needs a bounded domain")
    mesh = GridMesh.uniform(n, f.domain.lower, f.domain.upper)
    dec = decompose(sample(f, mesh))
    pos, neg = extract_measure(dec.positive), extract_measure(dec.negative)
    pos.to_csv(f"{cfg.out}_positive.csv")
    neg.to_csv(f"{cfg.out}_negative.csv")
    pts = mesh.points()
    header = [f"x{i + 1}" for i in range(mesh.dims)] + ["positive", "negative"]
    rows = [tuple(float(v) for v in p) + (float(a), float(b))
            for p, a, b in zip(pts, dec.positive.values.ravel(), dec.negative.values.ravel())]
    with open(f"{cfg.out}_fields.csv", "w", encoding="utf-8", newline="\n") as fh:
        fh.write(_csv(header, rows))
    summary = {"positive_atoms": len(pos), "negative_atoms": len(neg),
               "positive_variation": pos.total_variation(), "negative_variation": neg.total_variation(),
               "files": [f"{cfg.out}_{k}.csv" for k in ("positive", "negative", "fields")]}
    stdout.write(dump(summary) + "\n")
    return EXIT_OK


# reproduction fixtures ---------------------------------------------------

def _fixture_common_jump() -> list[tuple[str, bool]]:
    dom = BoxDomain([0.0], [2.0])
    one = AtomicSignedMeasure.dirac([1.0])
    g = StepFunction.from_measure(one, dom, "right", name="1{x>=1}")
    h = StepFunction.from_measure(one, dom, "right", name="1{x>=1}")
    rep = ibp_check(g, h)
    return [("psi_h(g) == 1", rep.lhs == 1.0), ("pi_g(survival h) == 0", rep.rhs == 0.0),
            ("hypothesis-violated flagged", "hypothesis-violated" in rep.flags)]


def _fixture_marginal_mismatch() -> list[tuple[str, bool]]:
    dom = BoxDomain.positive_orthant(2)
    first = SubsetIndex.from_axes([0], 2)
    pt = AtomicSignedMeasure.dirac([1.0, 1.0])
    # 1{x1>1} 1{x2>1}: strict orthants, left-continuous
    g = StepFunction.from_measure(pt, dom, "left", name="g")
    nu_g = g.induced_measure()
    m_lower = marginal_measure_of(lower_marginal(g, first), SubsetIndex.full(1))
    # 1{x1<1} 1{x2<1} = 1 - 1{x1>=1} - 1{x2>=1} + 1{x1>=1, x2>=1}
    one = AtomicSignedMeasure.dirac([1.0])
    h = StepFunction({(0,): one.scaled(-1), (1,): one.scaled(-1), (0, 1): pt}, dom, "right", 1.0)
    nu_h = h.induced_measure()
    m_upper = marginal_measure_of(upper_marginal(h, first), SubsetIndex.full(1))
    return [("nu_g = delta_(1,1)", nu_g.tv_distance(pt) == 0.0),
            ("nu_{g_1} is null", m_lower.is_null),
            ("tv(nu_{g_1}, nu_g^1) == 1", m_lower.tv_distance(nu_g.marginal(first)) == 1.0),
            ("nu_h = delta_(1,1)", nu_h.tv_distance(pt) == 0.0),
            ("nu_{h^1} is null", m_upper.is_null),
            ("tv(nu_{h^1}, nu_h^1) == 1", m_upper.tv_distance(nu_h.marginal(first)) == 1.0)]


def _fixture_copula_survival() -> list[tuple[str, bool]]:
    out = []
    u = np.linspace(0.0, 0.96875, 32)
    first = SubsetIndex.from_axes([0], 2)
    for C in (SemiCopulaFamily.independence(2), SemiCopulaFamily.upper_frechet(2),
              SemiCopulaFamily.lower_frechet(2)):
        pts = GridMesh.unit(32, 2).points()
        sv = survival(C).evaluate(pts)
        ok = np.max(np.abs(sv - (C.evaluate(pts) - pts[:, 0] - pts[:, 1] + 1))) < 1e-12
        up = upper_marginal(C, first)
        lo = lower_marginal(C, first)
        col = u[:, None]
        at1 = survival(C).evaluate(np.column_stack([u, np.ones_like(u)]))
        at0 = survival(C).evaluate(np.column_stack([u, np.zeros_like(u)]))
        out += [(f"{C.name}: survival = C - u - v + 1", bool(ok)),
                (f"{C.name}: survival of f^1 is 1-u, survival(f)(u,1) is 0",
                 bool(np.allclose(survival(up).evaluate(col), 1 - u, atol=1e-12, rtol=0)
                      and np.allclose(at1, 0.0, atol=1e-12, rtol=0))),
                (f"{C.name}: survival of f_1 is 0, survival(f)(u,0) is 1-u",
                 bool(np.allclose(survival(lo).evaluate(col), 0.0, atol=1e-12, rtol=0)
                      and np.allclose(at0, 1 - u, atol=1e-12, rtol=0)))]
    return out


def _fixture_frechet_lower_3d() -> list[tuple[str, bool]]:
    W3 = SemiCopulaFamily.lower_frechet(3)
    rep = check_semicopula(W3, GridMesh.unit(8, 3))
    M2 = SemiCopulaFamily.upper_frechet(2)
    return [("W3 is a quasi-copula", rep.is_quasicopula()),
            ("W3 variation diverges", is_measure_inducing(W3, [4, 8, 16]).verdict == "diverging"),
            ("M2 is measure inducing", is_measure_inducing(M2, [16, 32, 64]).verdict == "inducing")]


def _fixture_unbounded_lower_marginal() -> list[tuple[str, bool]]:
    dom = BoxDomain.positive_orthant(2)
    f = TaggedFunction(lambda x: x[:, 0] * x[:, 1] + np.sin(x[:, 0]), dom, "continuous",
                       name="xy+sin x")
    first = SubsetIndex.from_axes([0], 2)
    fm = lower_marginal(f, first)
    x = np.linspace(0.0, 20.0, 41)
    ok_sin = float(np.max(np.abs(fm.evaluate(x[:, None]) - np.sin(x)))) < 1e-12
    # variation of sin on [0, T] grows linearly with the truncation
    tv = []
    for T in (8 * math.pi, 16 * math.pi, 32 * math.pi):
        mesh = GridMesh.uniform(int(64 * T), [0.0], [T])
        tv.append(hk_variation(sample(fm, mesh)).total)
    growing = all(b / a >= 1.5 for a, b in zip(tv, tv[1:]))
    core = f.evaluate(np.array([[0.5, 2.0]]))[0] - f.evaluate(np.array([[0.5, 0.0]]))[0] \
        - f.evaluate(np.array([[0.0, 2.0]]))[0] + f.evaluate(np.array([[0.0, 0.0]]))[0]
    rational = TaggedFunction(lambda x: np.zeros(len(x)), dom, None, name="1{y in Q}")
    try:
        psi(rational, AtomicSignedMeasure.dirac([0.5, 0.5]))
        rejected = False
    except TagRequiredError:
        rejected = True
    return [("f_1 = sin", ok_sin), ("variation of sin grows with truncation", growing),
            ("quasi-volumes are Lebesgue", abs(core - 1.0) < 1e-12),
            ("untagged pathology rejected", rejected)]


def _fixture_product_minus_unbounded() -> list[tuple[str, bool]]:
    dom = BoxDomain.positive_orthant(2)
    f = TaggedFunction(lambda x: x[:, 0] * x[:, 1] - x[:, 0], dom, "continuous", name="xy-x")
    far = f.evaluate(np.array([[0.5, 1e6], [2.0, 1e6]]))
    first = SubsetIndex.from_axes([0], 2)
    try:
        upper_marginal(f, first).evaluate(np.array([[0.5]]))
        diverges = False
    except LimitDivergenceError:
        diverges = True
    low = lower_marginal(f, first).evaluate(np.array([[0.5], [2.0]]))
    # both Jordan parts of the box function grow without bound under truncation
    parts = []
    for T in (2.0, 4.0, 8.0):
        dec = decompose(sample(f, GridMesh.uniform(16, [0.0, 0.0], [T, T])))
        face = -lower_marginal(f, first).evaluate(np.array([[T]]))[0]
        parts.append((float(dec.positive.values[-1, -1]), face))
    grow = all(b[0] > 2 * a[0] and b[1] > 1.5 * a[1] for a, b in zip(parts, parts[1:]))
    return [("f(x1, x2) grows without bound in x2 for every x1 > 0",
             bool(np.all(far > 1e5))),
            ("upper marginal does not exist", diverges),
            ("lower marginal is -x1", bool(np.allclose(low, [-0.5, -2.0], rtol=0, atol=1e-12))),
            ("positive and negative mass both unbounded", grow)]


FIXTURES: dict[str, Callable[[], list[tuple[str, bool]]]] = {
    "common_jump": _fixture_common_jump, "marginal_mismatch": _fixture_marginal_mismatch,
    "copula_survival": _fixture_copula_survival, "frechet_lower_3d": _fixture_frechet_lower_3d,
    "unbounded_lower_marginal": _fixture_unbounded_lower_marginal, "product_minus_unbounded": _fixture_product_minus_unbounded}


def cmd_reproduce(cfg: RunConfig, stdout) -> int:
    rows = []
    for name, fn in FIXTURES.items():
        try:
            checks = fn()
        except StieltjesError as exc:
            checks = [(f"raised {type(exc).__name__}: {exc}", False)]
        rows += [(name, what, ok) for what, ok in checks]
    if cfg.format == "csv":
        text = _csv(("fixture", "check", "result"),
                    [(a, b, "PASS" if ok else "FAIL") for a, b, ok in rows])
    else:
        text = "".join(f"{'PASS' if ok else 'FAIL'}  {a}: {b}\n" for a, b, ok in rows)
    _emit(cfg, text, stdout)
    return EXIT_OK if all(ok for *_, ok in rows) else EXIT_FAIL


HANDLERS = {"check": cmd_check, "variation": cmd_variation, "integrate": cmd_integrate,
            "ibp": cmd_ibp, "transform": cmd_transform, "extend": cmd_extend,
            "decompose": cmd_decompose, "reproduce-paper": cmd_reproduce}


def run(cfg: RunConfig, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    try:
        cfg.validate()
        return HANDLERS[cfg.command](cfg, stdout)
    except (HypothesisError, TagRequiredError) as exc:
        stderr.write(f"hypothesis not met: {exc}\n")
        return EXIT_HYPOTHESIS
    except (SpecError, UsageError, DomainError, ValueError) as exc:
        stderr.write(f"error: {exc}\n")
        return EXIT_USAGE
    except StieltjesError as exc:
        stderr.write(f"{type(exc).__name__}: {exc}\n")
        return EXIT_FAIL


def main(argv: Sequence[str] | None = None) -> int:
    try:
        cfg = config_from_args(argv)
    except UsageError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_USAGE
    return run(cfg)


if __name__ == "__main__":
    sys.exit(main())
