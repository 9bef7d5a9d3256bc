"""Limiting degree laws and their generating functions.

For a vertex of weight ``a`` the degree converges to

* a point mass at 0 when ``alpha < 1``;
* a compound Poisson law when ``alpha == 1``: ``N ~ Poisson(c*a*beta)``
  summands, each ``Poisson(c*B_k)`` with ``B_k ~ H``;
* a mixed Poisson law ``Poisson(c**2*a*beta*B)`` when ``alpha > 1``.

The mean of these laws is ``c**2*a*beta*E(B)`` while the expected degree
tends to ``c**2*a*beta*E(B**2)``. Laws can therefore be built with the
element-weight law replaced by its size-biased version
(``policy="size-biased"``), which makes the two agree. The default
``"as-stated"`` policy uses ``H`` itself.
"""
import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy import stats

from .model import HypothesisWarning, WeightSpec, check_theorem_conditions, point_mass, sample_weights

__all__ = [
    "LimitLaw",
    "LawPmf",
    "POLICIES",
    "limiting_law",
    "prelimit_law",
    "size_biased",
    "tau",
    "omega",
    "pgf_compound",
    "pgf_mixed_poisson",
    "pgf_prelimit",
    "pmf",
    "sample_limit",
    "expected_degree_limit",
    "write_pmf_csv",
]

POLICIES = ("as-stated", "size-biased")
# Poisson count truncation for the convolution path
TAIL_CUT = 1e-14
MC_SAMPLES = 200_000


@dataclass(frozen=True)
class LimitLaw:
    """A limiting degree law.

    ``rate`` is ``c*a*beta`` (compound) or ``c**2*a*beta`` (mixed) for a
    fixed vertex weight ``a``. When ``vertex_law`` is set the law is mixed
    over ``a ~ vertex_law`` and ``rate`` is the value for ``a = 1``.
    """

    variant: str
    rate: float = 0.0
    summand_scale: float = 0.0
    weight_law: WeightSpec = None
    policy: str = "as-stated"
    vertex_law: WeightSpec = None
    hypotheses_met: bool = True

    def __post_init__(self):
        if self.variant not in ("point_mass_zero", "compound_poisson", "mixed_poisson"):
            raise ValueError(f"unknown variant {self.variant!r}")
        if self.policy not in POLICIES:
            raise ValueError(f"unknown policy {self.policy!r}")
        if self.variant == "compound_poisson" and not (self.rate > 0 and self.summand_scale > 0):
            raise ValueError("compound Poisson rates must be positive")
        if self.variant == "mixed_poisson" and not self.rate > 0:
            raise ValueError("mixed Poisson rate must be positive")
        if self.variant != "point_mass_zero" and self.weight_law is None:
            raise ValueError("weight_law is required")

    @property
    def label(self):
        text = {
            "point_mass_zero": "PointMassZero",
            "compound_poisson": f"CompoundPoisson({self.rate!r}, {self.summand_scale!r}, {self.weight_law})",
            "mixed_poisson": f"MixedPoisson({self.rate!r}, {self.weight_law})",
        }[self.variant]
        if self.vertex_law is not None:
            text += f" mixed over a ~ {self.vertex_law}"
        if self.policy == "size-biased":
            text += " [size-biased adjudication variant]"
        if not self.hypotheses_met:
            text += " [formal limit, hypotheses unmet]"
        return text

    @property
    def is_exact(self):
        """True when :func:`pmf` has an exact (non Monte Carlo) path."""
        if self.variant == "point_mass_zero":
            return True
        return self.weight_law.is_discrete and (self.vertex_law is None or self.vertex_law.is_discrete)

    def _vertex_atoms(self):
        if self.vertex_law is None:
            return np.array([1.0]), np.array([1.0])
        return self.vertex_law.atoms()

    @property
    def mean(self):
        if self.variant == "point_mass_zero":
            return 0.0
        ea = 1.0 if self.vertex_law is None else self.vertex_law.mean
        eb = self.weight_law.mean
        if self.variant == "compound_poisson":
            return self.rate * ea * self.summand_scale * eb
        return self.rate * ea * eb

    def pgf(self, t):
        t = _check_t(t)
        if self.variant == "point_mass_zero":
            return 1.0
        if self.vertex_law is not None and not self.vertex_law.is_discrete:
            raise ValueError("pgf with a continuous vertex law is not available")
        total = 0.0
        for a, pa in zip(*self._vertex_atoms()):
            if self.variant == "compound_poisson":
                total += pa * _compound(t, self.rate * a, self.summand_scale, self.weight_law)
            else:
                total += pa * pgf_mixed_poisson(t, self.rate * a, self.weight_law)
        return total

    def to_dict(self):
        return {
            "variant": self.variant,
            "rate": self.rate,
            "summand_scale": self.summand_scale,
            "weight_law": None if self.weight_law is None else self.weight_law.to_text(),
            "vertex_law": None if self.vertex_law is None else self.vertex_law.to_text(),
            "policy": self.policy,
            "hypotheses_met": self.hypotheses_met,
            "mean": self.mean,
            "label": self.label,
        }


def _check_t(t):
    t = float(t)
    if not 0.0 <= t <= 1.0:
        raise ValueError(f"t must lie in [0, 1], got {t}")
    return t


def size_biased(h):
    """Law with distribution ``x dH(x) / E(B)``.

    Closed form for PointMass, TwoPoint, Exponential (to Gamma(2)), Gamma
    (shape + 1) and Pareto (index - 1).
    """
    mean = h.mean
    if not math.isfinite(mean):
        raise ValueError(f"{h} has infinite mean; size-biasing is undefined")
    if h.kind == "pointmass":
        return WeightSpec("pointmass", h.params)
    if h.kind == "twopoint":
        x1, p1, x2 = h.params
        return WeightSpec("twopoint", (x1, p1 * x1 / mean, x2))
    if h.kind == "exponential":
        return WeightSpec("gamma", (2.0, h.rate))
    if h.kind == "gamma":
        return WeightSpec("gamma", (h.shape + 1.0, h.rate))
    if h.kind == "pareto":
        return WeightSpec("pareto", (h.scale, h.index - 1.0))
    raise ValueError(f"no closed-form size-biased law for {h.kind}")


def limiting_law(params, a, h, policy="as-stated", f=None):
    """The limit law of the degree of a vertex with weight ``a``.

    Pass ``a=None`` together with ``f`` to mix over the vertex weight. The
    hypotheses are checked against ``f`` (a point mass at ``a`` when
    omitted); violations mark the law as a formal limit.
    """
    if policy not in POLICIES:
        raise ValueError(f"unknown policy {policy!r}")
    if a is None and f is None:
        raise ValueError("give a fixed vertex weight a or a vertex law f")
    if a is not None:
        a = float(a)
        if not (math.isfinite(a) and a > 0):
            raise ValueError("a must be positive")
    mean = h.mean
    if math.isfinite(mean) and abs(mean - 1.0) > 1e-12:
        warnings.warn(f"H={h} has mean {mean!r}, not 1", HypothesisWarning, stacklevel=2)
    report = check_theorem_conditions(params, f if f is not None else point_mass(a), h)
    if not report.theorem_ok:
        warnings.warn(f"theorem hypotheses violated for F={f}, H={h}", HypothesisWarning, stacklevel=2)
    ok = report.theorem_ok
    if params.regime == "i":
        return LimitLaw("point_mass_zero", policy=policy, hypotheses_met=ok)
    law = size_biased(h) if policy == "size-biased" else h
    scale = 1.0 if a is None else a
    vertex_law = f if a is None else None
    c, beta = params.c, params.beta
    if params.regime == "ii":
        return LimitLaw("compound_poisson", c * scale * beta, c, law, policy, vertex_law, ok)
    return LimitLaw("mixed_poisson", c * c * scale * beta, 0.0, law, policy, vertex_law, ok)


def prelimit_law(params, a, h, policy="as-stated"):
    """Compound Poisson law with PGF ``exp(c*a*beta*n**((alpha-1)/2) * (omega - 1))``.

    This is the finite-``n`` approximation reached before the last limit is
    taken; for ``alpha == 1`` it coincides with :func:`limiting_law`.
    """
    law = size_biased(h) if policy == "size-biased" else h
    shrink = params.n ** ((1.0 - params.alpha) / 2.0)
    return LimitLaw("compound_poisson", params.c * float(a) * params.beta / shrink, params.c * shrink, law, policy)


# ---------------------------------------------------------------------------
# generating functions
# ---------------------------------------------------------------------------

def tau(t, c, h):
    """``E exp(c*(t-1)*B)`` for ``B ~ h``."""
    return h.mgf(float(c) * (_check_t(t) - 1.0))


def omega(t, n, alpha, c, h):
    """``E exp(c*(t-1)*B*n**((1-alpha)/2))`` for ``B ~ h``."""
    return h.mgf(float(c) * (_check_t(t) - 1.0) * n ** ((1.0 - alpha) / 2.0))


def _compound(t, rate, scale, h):
    return math.exp(rate * (h.mgf(scale * (t - 1.0)) - 1.0))


def pgf_compound(t, c, a, beta, h):
    """``exp(c*a*beta*(tau(t) - 1))``: PGF of the alpha = 1 limit."""
    t = _check_t(t)
    return _compound(t, c * a * beta, c, h)


def pgf_mixed_poisson(t, rate_scale, mixing_law):
    """``E exp(rate_scale*B*(t-1))``: PGF of ``Poisson(rate_scale*B)``."""
    t = _check_t(t)
    return mixing_law.mgf(rate_scale * (t - 1.0))


def pgf_prelimit(t, params, a, h):
    """``exp(c*a*beta*n**((alpha-1)/2) * (omega(t, n) - 1))``."""
    t = _check_t(t)
    rate = params.c * a * params.beta * params.n ** ((params.alpha - 1.0) / 2.0)
    return math.exp(rate * (omega(t, params.n, params.alpha, params.c, h) - 1.0))


# ---------------------------------------------------------------------------
# pmf and sampling
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class LawPmf:
    """Probabilities on ``0..k_max`` and the mass above ``k_max``.

    ``stderr`` is set for Monte Carlo estimates and None for exact ones.
    """

    probs: np.ndarray
    tail: float
    exact: bool
    stderr: np.ndarray = None

    @property
    def k_max(self):
        return self.probs.size - 1


def _mixed_poisson_pmf(k, rate, atoms, masses):
    probs = np.zeros(k.size)
    tail = 0.0
    for b, pb in zip(atoms, masses):
        probs += pb * stats.poisson.pmf(k, rate * b)
        tail += pb * stats.poisson.sf(k[-1], rate * b)
    return probs, tail


def _compound_poisson_pmf(k, rate, scale, atoms, masses):
    summand, _ = _mixed_poisson_pmf(k, scale, atoms, masses)
    s_max = 0
    while stats.poisson.sf(s_max, rate) >= TAIL_CUT:
        s_max += 1
    counts = stats.poisson.pmf(np.arange(s_max + 1), rate)
    power = np.zeros(k.size)
    power[0] = 1.0
    probs = np.zeros(k.size)
    tail = stats.poisson.sf(s_max, rate)
    for s in range(s_max + 1):
        probs += counts[s] * power
        tail += counts[s] * max(0.0, 1.0 - power.sum())
        power = np.convolve(power, summand)[: k.size]
    return probs, tail


def _exact_pmf(law, k_max):
    k = np.arange(k_max + 1)
    atoms, masses = law.weight_law.atoms()
    probs = np.zeros(k.size)
    tail = 0.0
    for a, pa in zip(*law._vertex_atoms()):
        if law.variant == "mixed_poisson":
            p, t = _mixed_poisson_pmf(k, law.rate * a, atoms, masses)
        else:
            p, t = _compound_poisson_pmf(k, law.rate * a, law.summand_scale, atoms, masses)
        probs += pa * p
        tail += pa * t
    return probs, float(tail)


def _suggest_k_max(law, k_max, draws=None):
    """Smallest power-of-two multiple of ``k_max`` leaving tail mass <= 1e-6."""
    if draws is not None:
        return int(np.quantile(draws, 1 - 1e-6)) + 1
    k = max(k_max, 1)
    while k < 1 << 20:
        k *= 2
        if _exact_pmf(law, k)[1] <= 1e-6:
            break
    return k


def pmf(law, k_max, samples=MC_SAMPLES, seed=0):
    """Probability mass on ``0..k_max`` with the remaining tail mass.

    Exact for the point mass, and for compound/mixed Poisson laws whose
    weight law (and vertex law, when mixing) is discrete; otherwise a Monte
    Carlo estimate from ``samples`` draws of :func:`sample_limit` seeded by
    ``seed``, with per-entry standard errors.
    """
    k_max = int(k_max)
    if k_max < 0:
        raise ValueError("k_max must be nonnegative")
    k = np.arange(k_max + 1)
    if law.variant == "point_mass_zero":
        probs = np.zeros(k.size)
        probs[0] = 1.0
        return LawPmf(probs, 0.0, True)
    draws = None
    if law.is_exact:
        probs, tail = _exact_pmf(law, k_max)
        out = LawPmf(probs, tail, True)
    else:
        from .streams import stream

        draws = sample_limit(law, samples, stream(seed, "limit-pmf"))
        counts = np.bincount(np.minimum(draws, k_max + 1), minlength=k_max + 2)
        freq = counts / samples
        probs = freq[: k_max + 1]
        out = LawPmf(probs, float(freq[-1]), False, np.sqrt(probs * (1 - probs) / samples))
    if out.tail > 1e-6:
        warnings.warn(
            f"k_max={k_max} leaves tail mass {out.tail:.3g}; try k_max={_suggest_k_max(law, k_max, draws)}",
            stacklevel=2,
        )
    return out


def sample_limit(law, count, rng):
    """Draw ``count`` degrees from ``law`` with generator ``rng``."""
    count = int(count)
    if count < 0:
        raise ValueError("count must be nonnegative")
    if law.variant == "point_mass_zero":
        return np.zeros(count, dtype=np.int64)
    if law.vertex_law is None:
        a = np.ones(count)
    else:
        a = sample_weights(law.vertex_law, count, rng)
    if law.variant == "mixed_poisson":
        b = sample_weights(law.weight_law, count, rng)
        return rng.poisson(law.rate * a * b)
    n_terms = rng.poisson(law.rate * a)
    b = sample_weights(law.weight_law, int(n_terms.sum()), rng)
    terms = rng.poisson(law.summand_scale * b)
    owner = np.repeat(np.arange(count), n_terms)
    return np.bincount(owner, weights=terms, minlength=count).astype(np.int64)


def expected_degree_limit(c, a, beta, h):
    """``c**2 * a * beta * E(B**2)``; raises if ``E(B**2)`` is infinite."""
    second = h.moment(2)
    if not math.isfinite(second):
        raise ValueError(f"H={h} has infinite second moment; the expected degree diverges")
    return c * c * a * beta * second


def write_pmf_csv(result, fh):
    """CSV ``k,prob``; the tail mass is written on a final ``>k_max`` row."""
    fh.write("k,prob\n")
    for k, p in enumerate(result.probs.tolist()):
        fh.write(f"{k},{p!r}\n")
    fh.write(f">{result.k_max},{result.tail!r}\n")
