"""Empirical degree distributions and goodness-of-fit tests."""
import json
import math
from dataclasses import dataclass

import numpy as np
from scipy import stats as sps

__all__ = [
    "EmpiricalPmf",
    "empirical_degree_pmf",
    "tv_distance",
    "chi_square_gof",
    "pool_bins",
    "gof_report",
    "gof_json",
    "mean_ci",
    "isolated_fraction",
]


@dataclass(frozen=True, eq=False)
class EmpiricalPmf:
    """Occurrence counts ``counts[k]`` of each value ``k``."""

    counts: np.ndarray
    total: int

    def __post_init__(self):
        counts = np.asarray(self.counts, dtype=np.int64)
        if counts.ndim != 1 or np.any(counts < 0):
            raise ValueError("counts must be a nonnegative 1-d array")
        if int(counts.sum()) != self.total:
            raise ValueError("counts do not sum to total")
        object.__setattr__(self, "counts", counts)

    def __add__(self, other):
        size = max(self.counts.size, other.counts.size)
        counts = np.zeros(size, dtype=np.int64)
        counts[: self.counts.size] += self.counts
        counts[: other.counts.size] += other.counts
        return EmpiricalPmf(counts, self.total + other.total)

    def __eq__(self, other):
        if not isinstance(other, EmpiricalPmf):
            return NotImplemented
        return self.as_dict() == other.as_dict()

    def as_dict(self):
        return {int(k): int(c) for k, c in enumerate(self.counts) if c}

    @property
    def probs(self):
        if self.total == 0:
            return np.zeros(self.counts.size)
        return self.counts / self.total


def empirical_degree_pmf(degrees):
    degrees = np.asarray(degrees, dtype=np.int64)
    if degrees.size and degrees.min() < 0:
        raise ValueError("degrees must be nonnegative")
    return EmpiricalPmf(np.bincount(degrees), int(degrees.size))


def _as_probs(p):
    if isinstance(p, EmpiricalPmf):
        return p.probs
    p = np.asarray(p, dtype=float)
    total = p.sum()
    # leave already-normalized input untouched so equal inputs give exactly 0
    return p / total if total > 0 and abs(total - 1) > 1e-12 else p


def tv_distance(p, q, q_tail=0.0):
    """Half the L1 distance between ``p`` and ``q``.

    ``q_tail`` is the mass of ``q`` beyond its last entry; it is counted as
    if it lay where ``p`` has no mass, which can only overstate the distance.
    """
    p = _as_probs(p)
    q = np.asarray(q, dtype=float)
    size = max(p.size, q.size)
    pp = np.zeros(size)
    qq = np.zeros(size)
    pp[: p.size] = p
    qq[: q.size] = q
    return float(min(1.0, 0.5 * (np.abs(pp - qq).sum() + q_tail)))


def pool_bins(expected, min_expected):
    """Group consecutive bins, walking from the tail toward 0.

    A group is closed once its expected count reaches ``min_expected``;
    a short remainder at the front joins the group after it.
    Returns a list of index lists in ascending order.
    """
    groups = []
    current, acc = [], 0.0
    for k in range(len(expected) - 1, -1, -1):
        current.insert(0, k)
        acc += expected[k]
        if acc >= min_expected:
            groups.insert(0, current)
            current, acc = [], 0.0
    if current:
        if groups:
            groups[0] = current + groups[0]
        else:
            groups.insert(0, current)
    return groups


def chi_square_gof(emp, q, min_expected=5.0, q_tail=None):
    """Pearson chi-square test of ``emp`` against probabilities ``q``.

    ``q`` covers ``0..len(q)-1``; when ``q_tail`` is given (or ``q`` sums to
    less than one) a final bin holds the remaining mass and every observation
    beyond ``len(q) - 1``. Bins with expected count below ``min_expected``
    are pooled from the tail inward. Returns ``(statistic, dof, p_value,
    n_bins)``.
    """
    if emp.total <= 0:
        raise ValueError("empty sample")
    q = np.asarray(q, dtype=float)
    if q_tail is None:
        q_tail = 1.0 - q.sum()
        q_tail = q_tail if q_tail > 1e-12 else 0.0
    counts = np.zeros(q.size + 1)
    head = min(q.size, emp.counts.size)
    counts[:head] = emp.counts[:head]
    counts[-1] = emp.counts[q.size:].sum()
    expected = np.append(q, q_tail) * emp.total
    if counts[-1] == 0 and expected[-1] == 0:
        counts, expected = counts[:-1], expected[:-1]
    groups = pool_bins(expected, min_expected) if min_expected > 0 else [[k] for k in range(expected.size)]
    obs = np.array([counts[g].sum() for g in groups])
    exp = np.array([expected[g].sum() for g in groups])
    keep = (exp > 0) | (obs > 0)
    obs, exp = obs[keep], exp[keep]
    if obs.size < 2:
        raise ValueError(f"only {obs.size} bin(s) left after pooling; chi-square test needs at least 2")
    with np.errstate(divide="ignore"):
        statistic = float(np.sum((obs - exp) ** 2 / exp))
    dof = obs.size - 1
    return statistic, dof, float(sps.chi2.sf(statistic, dof)), int(obs.size)


def gof_report(emp, q, q_tail=0.0, min_expected=5.0):
    """Dict with keys ``statistic, dof, p_value, tv, n_samples, pooled_bins``."""
    statistic, dof, p_value, bins = chi_square_gof(emp, q, min_expected, q_tail)
    return {
        "statistic": statistic,
        "dof": dof,
        "p_value": p_value,
        "tv": tv_distance(emp, q, q_tail),
        "n_samples": emp.total,
        "pooled_bins": bins,
    }


def gof_json(report):
    """Serialized report with sorted keys."""
    return json.dumps(report, sort_keys=True, indent=2)


def mean_ci(samples, level=0.95):
    """Sample mean and normal-approximation half-width at ``level``."""
    x = np.asarray(samples, dtype=float)
    mean = float(x.mean())
    if x.size < 2:
        return mean, 0.0
    z = sps.norm.ppf(0.5 + level / 2.0)
    return mean, float(z * x.std(ddof=1) / math.sqrt(x.size))


def isolated_fraction(degrees):
    degrees = np.asarray(degrees)
    if degrees.size == 0:
        raise ValueError("no degrees given")
    return float(np.count_nonzero(degrees == 0) / degrees.size)
