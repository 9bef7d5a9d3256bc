"""Model parameters, weight laws and edge probabilities.

A graph instance is governed by :class:`ModelParams` ``(n, alpha, beta, c)``;
vertex weights follow a law ``F`` and element weights a law ``H``, both given
as :class:`WeightSpec` objects. The number of elements is
``m = floor(beta * n**alpha)`` and vertex ``i`` joins element ``j`` with
probability ``min(c * A_i * B_j * n**(-(1 + alpha) / 2), 1)``.
"""
import math
import sys
import warnings
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property

import mpmath
import numpy as np
from scipy import special

__all__ = [
    "HypothesisWarning",
    "ModelParams",
    "WeightSpec",
    "WeightAssignment",
    "Condition",
    "ConditionReport",
    "element_count",
    "edge_probability",
    "normalize_to_unit_mean",
    "moment",
    "check_theorem_conditions",
    "sample_weights",
    "draw_weights",
    "point_mass",
    "exponential",
    "gamma",
    "pareto",
    "two_point",
    "uniform",
]

# numpy cannot index arrays longer than this
MAX_ELEMENTS = min(sys.maxsize, 2**62)


class HypothesisWarning(UserWarning):
    """A weight law violates a moment condition of the limit theorems."""


# ---------------------------------------------------------------------------
# parameters
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ModelParams:
    n: int
    alpha: float
    beta: float
    c: float

    def __post_init__(self):
        if isinstance(self.n, bool) or int(self.n) != self.n or self.n < 1:
            raise ValueError(f"n must be a positive integer, got {self.n!r}")
        object.__setattr__(self, "n", int(self.n))
        for name in ("alpha", "beta", "c"):
            value = float(getattr(self, name))
            if not math.isfinite(value) or value <= 0:
                raise ValueError(f"{name} must be positive and finite, got {value!r}")
            object.__setattr__(self, name, value)

    @cached_property
    def m(self):
        # frozen instance, so the cached value cannot go stale
        return element_count(self)

    @property
    def scale(self):
        """The factor ``c * n**(-(1 + alpha) / 2)`` shared by all p_ij."""
        return self.c * self.n ** (-(1.0 + self.alpha) / 2.0)

    @property
    def regime(self):
        if self.alpha < 1:
            return "i"
        if self.alpha == 1:
            return "ii"
        return "iii"


def element_count(params):
    """Number of elements ``floor(beta * n**alpha)``.

    ``beta`` and ``alpha`` are read as the decimals they print as (so 0.3
    means 3/10). The product is evaluated in 60-digit arithmetic and, when
    it lies within 1e-40 of an integer, settled exactly in integers, so the
    floor does not depend on platform rounding.

    >>> element_count(ModelParams(8, 1.5, 2.0, 1.0))
    45
    >>> element_count(ModelParams(10, 1.0, 0.3, 1.0))
    3
    """
    beta = Fraction(repr(params.beta))
    alpha = Fraction(repr(params.alpha))
    n = params.n
    with mpmath.workdps(60):
        exponent = mpmath.mpf(alpha.numerator) / alpha.denominator
        value = mpmath.mpf(beta.numerator) / beta.denominator * mpmath.power(n, exponent)
        nearest = int(mpmath.nint(value))
        near = abs(value - nearest) < mpmath.mpf(10) ** -40
        m = int(mpmath.floor(value))
    if near and alpha.denominator <= 4096:
        # nearest <= beta * n**(p/q)  <=>  (nearest * den)**q <= num**q * n**p
        p, q = alpha.numerator, alpha.denominator
        m = nearest if (nearest * beta.denominator) ** q <= beta.numerator**q * n**p else nearest - 1
    if m > MAX_ELEMENTS:
        raise OverflowError(f"element count {m} exceeds the addressable limit {MAX_ELEMENTS}")
    return m


def _check_weights(x, name):
    x = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(x)) or np.any(x <= 0):
        raise ValueError(f"{name} must be positive and finite")
    return x


def edge_probability(params, a, b):
    """Connection probability ``min(c*a*b*n**(-(1+alpha)/2), 1)``.

    ``a`` and ``b`` broadcast against each other; scalars give a float.
    """
    a = _check_weights(a, "a")
    b = _check_weights(b, "b")
    p = np.minimum(params.scale * a * b, 1.0)
    return float(p) if p.ndim == 0 else p


# ---------------------------------------------------------------------------
# weight laws
# ---------------------------------------------------------------------------

PARAM_NAMES = {
    "pointmass": ("value",),
    "exponential": ("rate",),
    "gamma": ("shape", "rate"),
    "pareto": ("scale", "index"),
    "twopoint": ("x1", "p1", "x2"),
    "uniform": ("lo", "hi"),
}


@dataclass(frozen=True)
class WeightSpec:
    """A positive weight distribution from a fixed menu of six families.

    ``params`` holds the family parameters in the order of
    ``PARAM_NAMES[kind]``. Pareto has density ``index * scale**index /
    x**(index + 1)`` on ``x >= scale``; TwoPoint puts mass ``p1`` on ``x1`` and
    ``1 - p1`` on ``x2``.
    """

    kind: str
    params: tuple
    normalized: bool = field(default=False, compare=True)

    def __post_init__(self):
        if self.kind not in PARAM_NAMES:
            raise ValueError(f"unknown weight kind {self.kind!r}")
        names = PARAM_NAMES[self.kind]
        params = tuple(float(v) for v in self.params)
        if len(params) != len(names):
            raise ValueError(f"{self.kind} takes parameters {names}, got {params}")
        if not all(math.isfinite(v) and v > 0 for v in params):
            raise ValueError(f"{self.kind} parameters must be positive and finite: {params}")
        if self.kind == "twopoint" and not params[1] < 1:
            raise ValueError("twopoint needs 0 < p1 < 1")
        if self.kind == "uniform" and not params[0] < params[1]:
            raise ValueError("uniform needs 0 < lo < hi")
        object.__setattr__(self, "params", params)
        object.__setattr__(self, "normalized", bool(self.normalized))

    def __getattr__(self, name):
        # named parameter access, e.g. dist.rate
        try:
            names = PARAM_NAMES[object.__getattribute__(self, "kind")]
        except AttributeError:
            raise AttributeError(name) from None
        if name in names:
            return self.params[names.index(name)]
        raise AttributeError(name)

    def as_dict(self):
        return dict(zip(PARAM_NAMES[self.kind], self.params))

    # -- analytic properties ------------------------------------------------

    @property
    def is_discrete(self):
        return self.kind in ("pointmass", "twopoint")

    def atoms(self):
        """Support points and masses of a discrete law."""
        if self.kind == "pointmass":
            return np.array([self.value]), np.array([1.0])
        if self.kind == "twopoint":
            return np.array([self.x1, self.x2]), np.array([self.p1, 1.0 - self.p1])
        raise ValueError(f"{self.kind} is not discrete")

    @property
    def moment_frontier(self):
        """Supremum of the orders with a finite moment (exclusive)."""
        return self.index if self.kind == "pareto" else math.inf

    def moment(self, r):
        r = float(r)
        if not r > 0:
            raise ValueError("moment order must be positive")
        if r >= self.moment_frontier:
            return math.inf
        p = self.params
        if self.kind == "pointmass":
            return p[0] ** r
        if self.kind == "exponential":
            return math.exp(special.gammaln(r + 1) - r * math.log(p[0]))
        if self.kind == "gamma":
            shape, rate = p
            return math.exp(special.gammaln(shape + r) - special.gammaln(shape) - r * math.log(rate))
        if self.kind == "pareto":
            scale, index = p
            return index * scale**r / (index - r)
        if self.kind == "twopoint":
            x1, p1, x2 = p
            return p1 * x1**r + (1.0 - p1) * x2**r
        lo, hi = p
        return (hi ** (r + 1) - lo ** (r + 1)) / ((r + 1) * (hi - lo))

    @property
    def mean(self):
        return self.moment(1)

    def scaled(self, factor):
        """The law of ``factor * B``."""
        factor = float(factor)
        p = self.params
        if self.kind in ("exponential", "gamma"):
            new = p[:-1] + (p[-1] / factor,)
        elif self.kind == "pareto":
            new = (p[0] * factor, p[1])
        elif self.kind == "twopoint":
            new = (p[0] * factor, p[1], p[2] * factor)
        else:
            new = tuple(v * factor for v in p)
        return WeightSpec(self.kind, new)

    def mgf(self, s):
        """``E exp(s * B)`` for ``s <= 0``.

        Closed form for every family except Pareto, which is integrated
        numerically to absolute tolerance 1e-10.
        """
        s = float(s)
        if s > 0:
            raise ValueError("mgf is only evaluated on s <= 0")
        if s == 0:
            return 1.0
        p = self.params
        if self.kind == "pointmass":
            return math.exp(s * p[0])
        if self.kind == "twopoint":
            x1, p1, x2 = p
            return p1 * math.exp(s * x1) + (1.0 - p1) * math.exp(s * x2)
        if self.kind == "exponential":
            return p[0] / (p[0] - s)
        if self.kind == "gamma":
            shape, rate = p
            return (rate / (rate - s)) ** shape
        if self.kind == "uniform":
            lo, hi = p
            # exp(s*hi) - exp(s*lo) without cancellation
            return math.exp(s * lo) * math.expm1(s * (hi - lo)) / (s * (hi - lo))
        return _pareto_mgf(s, *p)

    # -- text form ----------------------------------------------------------

    def to_text(self):
        """Key-value text form, e.g. ``exponential:rate=2.0``.

        Floats are written with ``repr`` so parsing the text back gives the
        identical dist.
        """
        body = ",".join(f"{k}={v!r}" for k, v in self.as_dict().items())
        if self.normalized:
            body += ",normalized=1"
        return f"{self.kind}:{body}"

    @classmethod
    def from_text(cls, text):
        kind, sep, body = text.strip().partition(":")
        kind = kind.strip().lower()
        if kind not in PARAM_NAMES:
            raise ValueError(f"unknown weight kind {kind!r} in {text!r}")
        values = {}
        for item in filter(None, (s.strip() for s in body.split(","))):
            key, eq, val = item.partition("=")
            key = key.strip()
            if not eq or key in values:
                raise ValueError(f"malformed weight parameter {item!r} in {text!r}")
            values[key] = val.strip()
        normalized = values.pop("normalized", "0")
        if normalized not in ("0", "1"):
            raise ValueError(f"normalized must be 0 or 1 in {text!r}")
        names = PARAM_NAMES[kind]
        if set(values) != set(names):
            raise ValueError(f"{kind} expects parameters {names}, got {sorted(values)}")
        return cls(kind, tuple(float(values[k]) for k in names), normalized == "1")

    def __str__(self):
        return self.to_text()


def _pareto_mgf(s, scale, index):
    from scipy import integrate

    # substitute x = scale * u**(-1/index), u in (0, 1]
    def integrand(u):
        return math.exp(s * scale * u ** (-1.0 / index))

    value, err = integrate.quad(integrand, 0.0, 1.0, epsabs=1e-10, epsrel=0.0, limit=200)
    if not err <= 1e-10:
        raise ArithmeticError(
            f"pareto mgf quadrature did not converge: s={s}, estimate={value}, error={err}"
        )
    return value


def point_mass(value=1.0):
    return WeightSpec("pointmass", (value,))


def exponential(rate=1.0):
    return WeightSpec("exponential", (rate,))


def gamma(shape, rate):
    return WeightSpec("gamma", (shape, rate))


def pareto(scale, index):
    return WeightSpec("pareto", (scale, index))


def two_point(x1, p1, x2):
    return WeightSpec("twopoint", (x1, p1, x2))


def uniform(lo, hi):
    return WeightSpec("uniform", (lo, hi))


def moment(dist, r):
    """Raw moment ``E B**r``; ``inf`` exactly when it diverges."""
    return dist.moment(r)


def normalize_to_unit_mean(dist):
    """Rescale ``dist`` to mean one.

    Infinite-mean laws are returned unchanged (``normalized`` stays False)
    and a :class:`HypothesisWarning` is issued.
    """
    mean = dist.mean
    if not math.isfinite(mean):
        warnings.warn(f"{dist} has infinite mean and cannot be normalized", HypothesisWarning, stacklevel=2)
        return dist
    if dist.kind == "pointmass":
        out = WeightSpec("pointmass", (1.0,))
    elif dist.kind == "exponential":
        out = WeightSpec("exponential", (1.0,))
    elif dist.kind == "gamma":
        out = WeightSpec("gamma", (dist.shape, dist.shape))
    elif dist.kind == "pareto":
        out = WeightSpec("pareto", ((dist.index - 1.0) / dist.index, dist.index))
    else:
        out = dist.scaled(1.0 / mean)
    return WeightSpec(out.kind, out.params, normalized=True)


def sample_weights(dist, count, rng):
    """Draw ``count`` iid weights from ``dist`` using generator ``rng``."""
    count = int(count)
    if count < 0:
        raise ValueError("count must be nonnegative")
    p = dist.params
    if dist.kind == "pointmass":
        return np.full(count, p[0])
    if dist.kind == "twopoint":
        return np.where(rng.random(count) < p[1], p[0], p[2])
    if dist.kind == "uniform":
        x = rng.uniform(p[0], p[1], count)
        return np.maximum(x, p[0])
    if dist.kind == "exponential":
        x = rng.standard_exponential(count) / p[0]
    elif dist.kind == "gamma":
        x = rng.standard_gamma(p[0], count) / p[1]
    else:
        # numpy's pareto is the Lomax law, shifted here to support [1, inf)
        x = p[0] * (1.0 + rng.pareto(p[1], count))
    return np.maximum(x, np.finfo(float).tiny)


@dataclass(frozen=True)
class WeightAssignment:
    vertex_weights: np.ndarray
    element_weights: np.ndarray
    f: WeightSpec = None
    h: WeightSpec = None
    seed: int = None

    def __post_init__(self):
        for name in ("vertex_weights", "element_weights"):
            arr = np.asarray(getattr(self, name), dtype=float)
            if arr.ndim != 1:
                raise ValueError(f"{name} must be one-dimensional")
            if arr.size and (not np.all(np.isfinite(arr)) or np.any(arr <= 0)):
                raise ValueError(f"{name} must be positive and finite")
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    def check(self, params):
        if self.vertex_weights.size != params.n or self.element_weights.size != params.m:
            raise ValueError(
                f"weights have shape ({self.vertex_weights.size}, {self.element_weights.size}),"
                f" params need ({params.n}, {params.m})"
            )


def draw_weights(params, f, h, seed):
    """Sample vertex and element weights for ``params`` from keyed streams."""
    from .streams import stream

    for dist, label in ((f, "F"), (h, "H")):
        if not math.isfinite(dist.mean):
            warnings.warn(f"{label}={dist} has infinite mean", HypothesisWarning, stacklevel=2)
    a = sample_weights(f, params.n, stream(seed, "weights", "F"))
    b = sample_weights(h, params.m, stream(seed, "weights", "H"))
    return WeightAssignment(a, b, f, h, seed)


# ---------------------------------------------------------------------------
# theorem hypotheses
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Condition:
    name: str
    law: str  # "F" or "H"
    required_order: float
    plus_epsilon: bool
    frontier: float
    satisfied: bool

    def describe(self):
        order = f"{self.required_order:g}" + ("+eps" if self.plus_epsilon else "")
        state = "ok" if self.satisfied else "FAIL"
        return f"{self.name}: {self.law} needs finite moment of order {order} (frontier {self.frontier:g}) -> {state}"

    def to_dict(self):
        return {
            "name": self.name,
            "law": self.law,
            "required_order": self.required_order,
            "plus_epsilon": self.plus_epsilon,
            "frontier": "inf" if math.isinf(self.frontier) else self.frontier,
            "satisfied": self.satisfied,
        }


@dataclass(frozen=True)
class ConditionReport:
    regime: str
    entries: tuple

    @property
    def theorem_ok(self):
        return all(e.satisfied for e in self.entries if e.name.startswith("theorem"))

    @property
    def proposition_ok(self):
        return all(e.satisfied for e in self.entries if e.name.startswith("proposition"))

    @property
    def ok(self):
        return all(e.satisfied for e in self.entries)

    def to_dict(self):
        return {
            "regime": self.regime,
            "theorem_ok": self.theorem_ok,
            "proposition_ok": self.proposition_ok,
            "entries": [e.to_dict() for e in self.entries],
        }


def _condition(name, dist, law, order, plus_epsilon=False):
    frontier = dist.moment_frontier
    # order+eps finite for some eps>0  <=>  order < frontier, same as plain order
    order = Fraction(order)
    ok = math.isinf(frontier) or order < Fraction(repr(frontier))
    return Condition(name, law, float(order), plus_epsilon, frontier, ok)


def check_theorem_conditions(params, f, h):
    """Check the moment hypotheses that apply to ``params.alpha``.

    Returns a :class:`ConditionReport`; failures are entries, not errors.
    """
    entries = [_condition("theorem: F finite mean", f, "F", 1)]
    regime = params.regime
    if regime == "i":
        alpha = Fraction(repr(params.alpha))
        order = 2 * alpha / (1 - alpha)
        entries.append(_condition("theorem (i): H moment", h, "H", order, plus_epsilon=True))
    elif regime == "ii":
        entries.append(_condition("theorem (ii): H finite mean", h, "H", 1))
    else:
        entries.append(_condition("theorem (iii): H second moment", h, "H", 2))
    entries.append(_condition("proposition: F finite mean", f, "F", 1))
    entries.append(_condition("proposition: H second moment", h, "H", 2))
    return ConditionReport(regime, tuple(entries))
