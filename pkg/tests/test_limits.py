import io
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate, stats

from rig.limits import (
    LimitLaw,
    expected_degree_limit,
    limiting_law,
    omega,
    pgf_compound,
    pgf_mixed_poisson,
    pgf_prelimit,
    pmf,
    prelimit_law,
    sample_limit,
    size_biased,
    tau,
    write_pmf_csv,
)
from rig.model import (
    HypothesisWarning,
    ModelParams,
    WeightSpec,
    exponential,
    gamma,
    pareto,
    point_mass,
    two_point,
    uniform,
)
from rig.streams import stream


def panjer_compound_poisson(rate, summand, k_max):
    """Compound Poisson pmf by the Panjer recursion g_k = rate/k * sum_j j q_j g_{k-j}."""
    q = np.zeros(k_max + 1)
    q[: min(summand.size, k_max + 1)] = summand[: k_max + 1]
    g = np.zeros(k_max + 1)
    g[0] = math.exp(rate * (q[0] - 1.0))
    j = np.arange(k_max + 1)
    for k in range(1, k_max + 1):
        g[k] = rate / k * np.sum(j[1 : k + 1] * q[1 : k + 1] * g[k - 1 :: -1][: k])
    return g


def mixed_poisson_summand(scale, law, k_max):
    x, p = law.atoms()
    k = np.arange(k_max + 1)
    return sum(pi * stats.poisson.pmf(k, scale * xi) for xi, pi in zip(x, p))


# -- law construction --------------------------------------------------------

def test_limiting_law_examples():
    assert limiting_law(ModelParams(100, 0.5, 1, 1), 1.0, point_mass()).variant == "point_mass_zero"
    law = limiting_law(ModelParams(100, 1.0, 1, 1), 1.0, point_mass())
    assert law == LimitLaw("compound_poisson", 1.0, 1.0, point_mass(1.0), hypotheses_met=True)
    law = limiting_law(ModelParams(100, 1.5, 1, 1), 1.0, point_mass())
    assert (law.variant, law.rate, law.weight_law) == ("mixed_poisson", 1.0, point_mass(1.0))
    k = np.arange(30)
    assert np.allclose(pmf(law, 29).probs, stats.poisson.pmf(k, 1.0), atol=1e-15)


def test_limiting_law_rates():
    p = ModelParams(100, 1.0, 2.0, 3.0)
    law = limiting_law(p, 0.5, exponential())
    assert law.rate == pytest.approx(3.0 * 0.5 * 2.0) and law.summand_scale == 3.0
    law = limiting_law(ModelParams(100, 2.0, 2.0, 3.0), 0.5, exponential(), "size-biased")
    assert law.rate == pytest.approx(9.0 * 0.5 * 2.0)
    assert law.weight_law == gamma(2.0, 1.0) and law.policy == "size-biased"


def test_limiting_law_flags_violated_hypotheses():
    with pytest.warns(HypothesisWarning):
        law = limiting_law(ModelParams(100, 1.5, 1, 1), 1.0, pareto(1 / 3, 1.5))
    assert not law.hypotheses_met
    assert "hypotheses unmet" in law.label


def test_limiting_law_mixing_over_f():
    law = limiting_law(ModelParams(100, 1.0, 1, 1), None, point_mass(), f=two_point(0.5, 0.5, 1.5))
    assert law.vertex_law == two_point(0.5, 0.5, 1.5)
    # mixture over a of the fixed-a laws
    lo = limiting_law(ModelParams(100, 1.0, 1, 1), 0.5, point_mass())
    hi = limiting_law(ModelParams(100, 1.0, 1, 1), 1.5, point_mass())
    mixed = pmf(law, 40).probs
    assert np.allclose(mixed, 0.5 * pmf(lo, 40).probs + 0.5 * pmf(hi, 40).probs, atol=1e-14)
    assert law.pgf(0.3) == pytest.approx(0.5 * lo.pgf(0.3) + 0.5 * hi.pgf(0.3), abs=1e-14)


# -- generating functions ----------------------------------------------------

def test_pgf_compound_examples():
    assert pgf_compound(1.0, 1, 1, 1, exponential()) == 1.0
    assert pgf_compound(0.0, 1, 1, 1, point_mass()) == pytest.approx(math.exp(math.exp(-1) - 1), abs=1e-15)
    assert pgf_compound(0.0, 1, 1, 1, point_mass()) == pytest.approx(0.531464, abs=5e-7)
    grid = np.linspace(0, 1, 100)
    values = [pgf_compound(t, 1.3, 0.7, 2.0, exponential()) for t in grid]
    assert np.all(np.diff(values) >= 0)


def test_pgf_mixed_examples():
    assert pgf_mixed_poisson(1.0, 2.0, exponential()) == 1.0
    assert pgf_mixed_poisson(0.0, 2.0, point_mass()) == pytest.approx(math.exp(-2), abs=1e-15)
    value = pgf_mixed_poisson(0.0, 1.0, two_point(1, 0.5, 3))
    assert value == pytest.approx(0.5 * (math.exp(-1) + math.exp(-3)), abs=1e-15)
    assert value == pytest.approx(0.208833, abs=5e-7)


def test_pgf_rejects_t_outside_unit_interval():
    with pytest.raises(ValueError):
        pgf_compound(1.5, 1, 1, 1, point_mass())
    with pytest.raises(ValueError):
        pgf_mixed_poisson(-0.1, 1, point_mass())


@pytest.mark.parametrize("h", [exponential(1.0), gamma(3.0, 3.0), uniform(0.5, 1.5), pareto(2 / 3, 3.0)], ids=str)
def test_tau_against_quadrature(h):
    c, t = 1.7, 0.35
    if h.kind == "pareto":
        xm, a = h.params
        dens, lo, hi = (lambda x: a * xm**a / x ** (a + 1)), xm, math.inf
    elif h.kind == "uniform":
        dens, lo, hi = (lambda x: 1.0), 0.5, 1.5
    elif h.kind == "gamma":
        dens, lo, hi = (lambda x: 27 * x * x * math.exp(-3 * x) / 2), 0.0, math.inf
    else:
        dens, lo, hi = (lambda x: math.exp(-x)), 0.0, math.inf
    expected, _ = integrate.quad(lambda x: math.exp(c * (t - 1) * x) * dens(x), lo, hi, epsabs=1e-13)
    assert tau(t, c, h) == pytest.approx(expected, abs=1e-10)


def test_omega_and_prelimit():
    h = exponential()
    params = ModelParams(10**4, 1.5, 1.0, 1.0)
    t = 0.2
    shrink = params.n ** (-0.25)
    assert omega(t, params.n, 1.5, 1.0, h) == pytest.approx(1 / (1 + 0.8 * shrink), rel=1e-14)
    law = prelimit_law(params, 1.0, h)
    assert law.pgf(t) == pytest.approx(pgf_prelimit(t, params, 1.0, h), rel=1e-13)
    # omega-form converges to the alpha > 1 limit
    gaps = []
    for n in (10**4, 10**8, 10**16):
        p = ModelParams(n, 1.5, 1.0, 1.0)
        gaps.append(abs(pgf_prelimit(t, p, 1.0, point_mass()) - math.exp(-0.8)))
    assert gaps[0] > gaps[1] > gaps[2] and gaps[2] < 1e-4
    # for alpha = 1 the pre-limit law is the limit law
    p = ModelParams(500, 1.0, 2.0, 1.5)
    assert prelimit_law(p, 0.7, h) == limiting_law(p, 0.7, h)


# -- pmf ---------------------------------------------------------------------

def test_pmf_examples():
    law = LimitLaw("compound_poisson", 1.0, 1.0, point_mass())
    res = pmf(law, 40)
    assert res.exact and res.stderr is None
    assert res.probs[0] == pytest.approx(math.exp(math.exp(-1) - 1), abs=1e-12)
    law = LimitLaw("mixed_poisson", 2.0, 0.0, point_mass())
    assert pmf(law, 40).probs[0] == pytest.approx(math.exp(-2), abs=1e-15)
    zero = pmf(LimitLaw("point_mass_zero"), 5)
    assert zero.probs.tolist() == [1, 0, 0, 0, 0, 0] and zero.tail == 0


@pytest.mark.parametrize(
    "rate,scale,law",
    [(1.0, 1.0, point_mass()), (2.5, 0.7, two_point(0.5, 0.5, 1.5)), (0.3, 4.0, two_point(0.1, 0.9, 9.1))],
)
def test_convolution_path_matches_panjer(rate, scale, law):
    k_max = 120
    res = pmf(LimitLaw("compound_poisson", rate, scale, law), k_max)
    oracle = panjer_compound_poisson(rate, mixed_poisson_summand(scale, law, k_max), k_max)
    assert np.allclose(res.probs, oracle, atol=1e-13, rtol=0)
    assert abs(res.probs.sum() + res.tail - 1) < 1e-9
    assert abs(res.probs[0] - LimitLaw("compound_poisson", rate, scale, law).pgf(0.0)) < 1e-12


@settings(max_examples=40, deadline=None)
@given(
    st.sampled_from(["compound_poisson", "mixed_poisson"]),
    st.floats(0.05, 6),
    st.floats(0.05, 3),
    st.floats(0.05, 5),
    st.floats(0.01, 0.99),
    st.floats(0.05, 5),
)
def test_exact_path_identities(variant, rate, scale, x1, p1, x2):
    law = LimitLaw(variant, rate, scale if variant == "compound_poisson" else 0.0, two_point(x1, p1, x2))
    res = pmf(law, 200)
    assert abs(res.probs.sum() + res.tail - 1) < 1e-9
    assert abs(res.probs[0] - law.pgf(0.0)) < 1e-12


def test_mixed_point_mass_equals_poisson():
    k = np.arange(60)
    for rate in (0.1, 1.0, 7.3):
        res = pmf(LimitLaw("mixed_poisson", rate, 0.0, point_mass()), 59)
        assert np.max(np.abs(res.probs - stats.poisson.pmf(k, rate))) < 1e-12


def test_heaviside_reduction():
    # unit element weights: summands are plain Poisson(c)
    law = limiting_law(ModelParams(100, 1.0, 1.3, 0.8), 1.2, point_mass())
    k_max = 60
    summand = stats.poisson.pmf(np.arange(k_max + 1), 0.8)
    oracle = panjer_compound_poisson(0.8 * 1.2 * 1.3, summand, k_max)
    assert np.allclose(pmf(law, k_max).probs, oracle, atol=1e-13)


def test_monte_carlo_pmf_for_continuous_law():
    law = LimitLaw("mixed_poisson", 1.0, 0.0, exponential())
    res = pmf(law, 30, samples=200_000, seed=4)
    assert not res.exact and res.stderr is not None
    # Poisson(B) with B ~ Exp(1) is geometric: P(k) = 2**-(k+1)
    exact = 0.5 ** (np.arange(31) + 1)
    sd = np.sqrt(exact * (1 - exact) / 200_000)
    assert np.all(np.abs(res.probs - exact) < 5 * sd + 1 / 200_000)
    again = pmf(law, 30, samples=200_000, seed=4)
    assert np.array_equal(res.probs, again.probs)


def test_small_k_max_warns():
    law = LimitLaw("compound_poisson", 0.3, 4.0, two_point(0.1, 0.9, 9.1))
    with pytest.warns(UserWarning, match="try k_max=") as record:
        pmf(law, 20)
    suggested = int(str(record[0].message).rsplit("=", 1)[1])
    assert pmf(law, suggested).tail <= 1e-6


def test_pmf_csv():
    buf = io.StringIO()
    write_pmf_csv(pmf(LimitLaw("point_mass_zero"), 2), buf)
    assert buf.getvalue() == "k,prob\n0,1.0\n1,0.0\n2,0.0\n>2,0.0\n"


# -- sampling ----------------------------------------------------------------

def test_sample_point_mass_zero():
    assert sample_limit(LimitLaw("point_mass_zero"), 10, stream(0)).tolist() == [0] * 10


def test_sample_compound_mean():
    x = sample_limit(LimitLaw("compound_poisson", 1.0, 1.0, point_mass()), 10**6, stream(1, "cp"))
    # mean = c*a*beta * c*E(B) = 1
    assert abs(x.mean() - 1.0) < 4 * x.std(ddof=1) / 1000


@pytest.mark.parametrize(
    "law",
    [
        LimitLaw("compound_poisson", 1.7, 0.6, exponential()),
        LimitLaw("compound_poisson", 0.9, 2.0, gamma(2.0, 2.0)),
        LimitLaw("mixed_poisson", 3.0, 0.0, uniform(0.5, 1.5)),
        LimitLaw("compound_poisson", 1.0, 1.0, point_mass(), vertex_law=exponential()),
    ],
    ids=lambda l: l.label,
)
def test_sample_mean_identity(law):
    x = sample_limit(law, 10**6, stream(2, "mean"))
    assert abs(x.mean() - law.mean) < 4 * x.std(ddof=1) / 1000


def test_sample_matches_exact_pmf():
    law = LimitLaw("compound_poisson", 1.0, 1.0, point_mass())
    x = sample_limit(law, 10**6, stream(3, "tv"))
    res = pmf(law, 60)
    emp = np.bincount(x, minlength=61)[:61] / x.size
    assert 0.5 * np.abs(emp - res.probs).sum() + res.tail < 0.005


def test_sample_deterministic():
    law = LimitLaw("compound_poisson", 2.0, 1.0, exponential())
    a = sample_limit(law, 1000, stream(9, "x"))
    b = sample_limit(law, 1000, stream(9, "x"))
    assert np.array_equal(a, b)


# -- expected degree and size bias --------------------------------------------

def test_expected_degree_limit_examples():
    assert expected_degree_limit(2, 1, 3, point_mass()) == 12
    assert expected_degree_limit(1, 1, 1, exponential()) == pytest.approx(2.0, abs=1e-14)
    assert expected_degree_limit(1.3, 2.0, 0.7, exponential()) == pytest.approx(
        2 * expected_degree_limit(1.3, 1.0, 0.7, exponential())
    )
    with pytest.raises(ValueError):
        expected_degree_limit(1, 1, 1, pareto(0.5, 2.0))


def test_size_biased_examples():
    assert size_biased(point_mass()) == point_mass()
    sb = size_biased(two_point(1, 0.5, 3))
    # masses proportional to x p(x): 0.5 and 1.5
    assert sb.params == (1.0, 0.25, 3.0)
    assert size_biased(exponential(1.0)).mean == pytest.approx(2.0)
    with pytest.raises(ValueError):
        size_biased(pareto(1, 0.9))
    with pytest.raises(ValueError):
        size_biased(uniform(0.5, 1.5))


@pytest.mark.parametrize(
    "h", [point_mass(2.0), two_point(0.5, 0.5, 1.5), exponential(2.0), gamma(1.5, 0.5), pareto(1.0, 3.5)], ids=str
)
def test_size_biased_mean_identity(h):
    assert size_biased(h).mean == pytest.approx(h.moment(2) / h.mean, rel=1e-12)


def test_size_biased_idempotent_only_for_point_mass():
    assert size_biased(size_biased(point_mass(1.0))) == point_mass(1.0)
    h = two_point(0.5, 0.5, 1.5)
    assert size_biased(h) != h


def test_law_validation():
    with pytest.raises(ValueError):
        LimitLaw("compound_poisson", 0.0, 1.0, point_mass())
    with pytest.raises(ValueError):
        LimitLaw("mixed_poisson", 1.0)
    with pytest.raises(ValueError):
        LimitLaw("negative_binomial", 1.0, 1.0, point_mass())
    with pytest.raises(ValueError):
        limiting_law(ModelParams(10, 1.0, 1.0, 1.0), 1.0, point_mass(), policy="other")


def test_law_serializes():
    d = limiting_law(ModelParams(10, 1.0, 1.0, 1.0), 1.0, WeightSpec.from_text("exponential:rate=1.0")).to_dict()
    assert d["variant"] == "compound_poisson" and d["weight_law"] == "exponential:rate=1.0"
    assert d["mean"] == pytest.approx(1.0)
