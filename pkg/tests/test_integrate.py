import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from fixtures import ibp_pair, transform_fixture
from oracles import fubini_double_sum, survival_fubini
from stieltjes import (AtomicSignedMeasure, BoxDomain, DistributionFunction1D, GridMesh,
                       Polynomial, SemiCopulaFamily, StepFunction, TaggedFunction,
                       discretize_semicopula, extract_measure, generalized_inverse, ibp_check,
                       indicator_ge, pi, psi, staircase_cdf, survival, transform_check)
from stieltjes.domain import SubsetIndex, enumerate_subsets
from stieltjes.errors import EvaluationError, HypothesisError, TagRequiredError
from stieltjes.integrate import marginal_measure_of

JUMP_DOMAIN = BoxDomain([0.0], [2.0])


# psi ----------------------------------------------------------------------

def test_psi_jump():
    g = indicator_ge([1.0], JUMP_DOMAIN)
    assert psi(g, AtomicSignedMeasure.dirac([1.0])) == 1.0
    assert psi(g, AtomicSignedMeasure.empty(1)) == 0.0


@pytest.mark.parametrize("n", [1, 4, 16, 64])
def test_psi_product_against_comonotone_grid(n):
    uv = Polynomial([(1.0, (1, 1))], BoxDomain.unit(2), tag="left")
    nu = extract_measure(discretize_semicopula(SemiCopulaFamily.upper_frechet(2), n))
    # atoms (k/(n+1), k/(n+1)) of mass 1/n
    assert psi(uv, nu) == pytest.approx((2 * n + 1) / (6 * (n + 1)), abs=1e-15)


def test_psi_rejects_untagged():
    f = TaggedFunction(lambda x: x[:, 0], BoxDomain.unit(1))
    with pytest.raises(TagRequiredError):
        psi(f, AtomicSignedMeasure.dirac([0.5]))


def test_psi_names_bad_atom():
    f = TaggedFunction(lambda x: np.where(x[:, 0] > 0.5, np.nan, 1.0), BoxDomain.unit(1), "left")
    with pytest.raises(EvaluationError, match="0.75"):
        psi(f, AtomicSignedMeasure([[0.25], [0.75]], [1.0, 1.0]))


# pi -----------------------------------------------------------------------

def test_pi_jump_example():
    g = indicator_ge([1.0], JUMP_DOMAIN)
    h = indicator_ge([1.0], JUMP_DOMAIN)
    br = pi(g, survival(h))
    assert br.total == 0.0 and br.corner == 0.0


def test_pi_grounded_single_term():
    g, h, _ = ibp_pair(2, 11, grounded_g=True)
    f = survival(h)
    br = pi(g, f)
    assert br.total == pytest.approx(psi(f, g.induced_measure()), abs=1e-14)
    assert all(v == 0.0 for k, v in br.terms.items() if not k.is_full)


def test_pi_only_corner():
    dom = BoxDomain.unit(2)
    g = StepFunction({}, dom, "left", constant=2.5)
    one = TaggedFunction(lambda x: np.ones(len(x)), dom, "continuous")
    assert pi(g, one).total == 2.5


@given(st.integers(1, 3), st.integers(0, 10 ** 6), st.floats(-3, 3), st.floats(-3, 3))
def test_pi_linear_in_integrand(d, seed, alpha, beta):
    g, _, _ = ibp_pair(d, seed)
    dom = BoxDomain.unit(d)
    f1 = TaggedFunction(lambda x: np.sin(3 * x).sum(axis=1), dom, "continuous")
    f2 = TaggedFunction(lambda x: np.prod(1 + x, axis=1), dom, "continuous")
    mix = TaggedFunction(lambda x: alpha * f1.evaluate(x) + beta * f2.evaluate(x), dom,
                         "continuous")
    lhs = pi(g, mix).total
    rhs = alpha * pi(g, f1).total + beta * pi(g, f2).total
    assert lhs == pytest.approx(rhs, abs=1e-10)


def test_pi_is_deterministic():
    g, h, _ = ibp_pair(3, 5)
    runs = {pi(g, survival(h)).total for _ in range(5)}
    assert len(runs) == 1


# ibp ----------------------------------------------------------------------

@pytest.mark.parametrize("d", [1, 2, 3])
@pytest.mark.parametrize("mirrored", [False, True])
def test_ibp_against_fubini_oracle(d, mirrored):
    for seed in range(40):
        g, h, o = ibp_pair(d, 1000 * d + seed, mirrored)
        oracle = fubini_double_sum(o["g_const"], o["g_components"], o["g_strict"], o["h_atoms"])
        rep = ibp_check(g, h)
        assert not rep.flags
        assert abs(rep.lhs - oracle) < 1e-10
        assert abs(rep.rhs - oracle) < 1e-10


@pytest.mark.parametrize("d", [1, 2, 3])
def test_grounded_pair_symmetry(d):
    for seed in range(20):
        g, h, o = ibp_pair(d, 7000 + seed, grounded_g=True)
        lhs = psi(g, h.induced_measure())
        rhs = psi(survival(h), g.induced_measure())
        oracle = survival_fubini(o["h_atoms"], o["h_strict"],
                                 o["g_components"][tuple(range(d))], None)
        assert lhs == pytest.approx(rhs, abs=1e-10)
        assert rhs == pytest.approx(oracle, abs=1e-10)


def test_ibp_common_jump():
    g = indicator_ge([1.0], JUMP_DOMAIN)
    h = indicator_ge([1.0], JUMP_DOMAIN)
    rep = ibp_check(g, h)
    assert (rep.lhs, rep.rhs) == (1.0, 0.0) and rep.flags == ["hypothesis-violated"]


def test_ibp_hypotheses():
    g, h, _ = ibp_pair(2, 3)
    with pytest.raises(HypothesisError):
        ibp_check(g, g)           # g is not grounded
    untagged = TaggedFunction(h.evaluate, h.domain, "untagged", grounded=True, bound=10.0)
    with pytest.raises(HypothesisError):
        ibp_check(g, untagged)
    unbounded = TaggedFunction(h.evaluate, h.domain, "right", grounded=True)
    with pytest.raises(HypothesisError):
        ibp_check(g, unbounded)


def test_ibp_generic_functions_on_mesh():
    # generic right-tagged wrappers fall back to extraction on a node-aligned mesh
    dom = BoxDomain.unit(2)
    mesh = GridMesh.unit(8, 2)
    m = AtomicSignedMeasure([[0.375, 0.625], [0.75, 0.25]], [1.5, -0.5])
    h_step = StepFunction.from_measure(m, dom, "right")
    h = TaggedFunction(h_step.evaluate, dom, "right", grounded=True, bound=2.0)
    g = TaggedFunction(lambda x: np.cos(x[:, 0]) + x[:, 0] * x[:, 1] ** 2, dom, "continuous")
    rep = ibp_check(g, h, mesh)
    assert rep.lhs == pytest.approx(psi(g, m), abs=1e-14)
    # cell-mass extraction for the continuous g converges at first order
    res = [ibp_check(g, h, GridMesh.unit(n, 2)).residual for n in (8, 32, 128)]
    assert res[0] > 3 * res[1] > 9 * res[2] and res[2] < 1e-2


# Sklar composition --------------------------------------------------------

@pytest.mark.parametrize("copula", ["independence", "upper_frechet", "lower_frechet"])
def test_sklar_composition(copula):
    rng = np.random.default_rng({"independence": 1, "upper_frechet": 2, "lower_frechet": 3}[copula])
    C = getattr(SemiCopulaFamily, copula)(2)
    Fs = []
    for _ in range(2):
        k = int(rng.integers(2, 6))
        Fs.append(DistributionFunction1D(np.sort(rng.uniform(0.05, 0.95, k)),
                                         rng.dirichlet(np.ones(k))))
    dom = BoxDomain.unit(2)
    F = TaggedFunction(lambda x: C.evaluate(np.column_stack(
        [Fi.evaluate(x[:, [i]]) for i, Fi in enumerate(Fs)])), dom, "right", grounded=True,
        bound=1.0)
    mesh = GridMesh([np.unique(np.concatenate([[0.0, 1.0], Fi.points])) for Fi in Fs])
    f, _, _ = ibp_pair(2, 99)          # left-continuous integrand with all marginals
    direct = psi(f, marginal_measure_of(F, SubsetIndex.full(2), mesh, "extract"))
    assert direct == pytest.approx(pi(f, survival(F)).total, abs=1e-9)


# generalized inverse ------------------------------------------------------

def test_inverse_uniform_is_identity():
    t = np.linspace(0, 1, 11)
    assert np.array_equal(generalized_inverse(DistributionFunction1D.uniform())(t), t)


def test_inverse_staircase():
    inv = generalized_inverse(staircase_cdf(4))
    assert inv(np.array([0.25, 0.5, 0.75, 1.0])) == pytest.approx([0.2, 0.4, 0.6, 0.8],
                                                                  abs=1e-15)


def test_inverse_truncated_maps_to_upper_end():
    F = DistributionFunction1D([0.2, 0.5], [0.3, 0.3])
    assert generalized_inverse(F)(np.array([0.8]))[0] == 1.0


def test_inverse_by_bisection():
    F = DistributionFunction1D(cdf=lambda x: np.clip(x, 0, 1) ** 2)
    t = np.array([0.04, 0.25, 0.81])
    assert generalized_inverse(F)(t) == pytest.approx(np.sqrt(t), abs=1e-12)


@given(st.integers(0, 10 ** 6), st.floats(0.001, 0.999), st.floats(0, 1))
def test_inverse_galois_connection(seed, t, x):
    rng = np.random.default_rng(seed)
    k = int(rng.integers(1, 8))
    F = DistributionFunction1D(np.sort(rng.uniform(0, 1, k)), rng.dirichlet(np.ones(k)))
    q = generalized_inverse(F)(np.array([t]))[0]
    Fx = F(np.array([x]))[0]
    # F^[-1](t) <= x  iff  t <= F(x), up to the quantile tolerance
    if abs(Fx - t) > 1e-9:
        assert (q <= x) == (t <= Fx)


# transformation formula ---------------------------------------------------

def test_transform_identity_marginals():
    dom = BoxDomain.unit(1)
    g = Polynomial([(1.0, (1,))], dom, tag="left")
    h = Polynomial([(1.0, (1,))], dom)
    rep = transform_check(g, [DistributionFunction1D.uniform()], h, mesh=GridMesh.unit(64, 1))
    assert rep.residual == 0.0 and not rep.flags


def test_transform_mass_beyond_last_jump():
    # g(x) = x charges [0.75, 1] where F = 1; the right side integrates h = 1
    # there while the quantile side never reaches level one
    dom = BoxDomain.unit(1)
    g = Polynomial([(1.0, (1,))], dom, tag="left")
    h = Polynomial([(1.0, (1,))], dom)
    F = DistributionFunction1D([0.25, 0.5, 0.75], [1 / 3, 1 / 3, 1 / 3])
    rep = transform_check(g, [F], h)
    assert rep.flags == ["mass-at-level-one"]
    assert rep.lhs == pytest.approx(0.25, abs=1e-12)
    assert rep.rhs == pytest.approx(0.5, abs=1e-12)


def test_transform_grounded_step_uniform_lattice():
    dom = BoxDomain.unit(2)
    rng = np.random.default_rng(4)
    g = StepFunction.from_measure(AtomicSignedMeasure(rng.uniform(0.05, 0.7, (5, 2)),
                                                      rng.normal(size=5)), dom, "left")
    F = DistributionFunction1D([0.25, 0.5, 0.75], [1 / 3, 1 / 3, 1 / 3])
    h = TaggedFunction(lambda u: np.exp(u[:, 0]) * u[:, 1] + u[:, 1] ** 2, dom, "continuous")
    rep = transform_check(g, [F, F], h)
    assert rep.residual < 1e-10 and not rep.flags


@pytest.mark.parametrize("d", [1, 2])
def test_transform_random_fixtures(d):
    for seed in range(10):
        g, Fs, c = transform_fixture(d, 500 + seed)
        dom = BoxDomain.unit(d)
        h = TaggedFunction(lambda u: c[0] + c[1] * np.sin(u.sum(axis=1)) + c[2] * u.prod(axis=1),
                           dom, "continuous")
        rep = transform_check(g, Fs, h)
        assert rep.residual < 1e-10 and not rep.flags


def test_marginal_measure_routes_agree():
    g, _, _ = ibp_pair(2, 8)
    for s in enumerate_subsets(2):
        exact = marginal_measure_of(g, s, method="exact")
        assert math.isclose(exact.total_mass(), g.induced_measure(s).total_mass())
