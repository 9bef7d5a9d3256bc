"""Config-driven verification runs.

A run samples graphs at one or more ``(n, alpha)`` points, harvests vertex
degrees and compares them with the limit laws. Every output byte is a
function of the config text alone.

Config files are flat ``key = value`` lines; ``#`` starts a comment::

    n = 1000, 10000        # one value or a strictly increasing list
    alpha = 1
    h = twopoint:x1=0.5,p1=0.5,x2=1.5
    replicates = 10
"""
import json
import math
import os
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, fields, replace

import numpy as np

from . import stats
from .genbip import NAIVE_BUDGET, generate_naive, generate_thinned
from .limits import expected_degree_limit, limiting_law, pmf
from .model import (
    HypothesisWarning,
    ModelParams,
    WeightSpec,
    check_theorem_conditions,
    draw_weights,
    normalize_to_unit_mean,
    point_mass,
)
from .project import degree_array
from .streams import stream

__all__ = [
    "ConfigError",
    "ExperimentConfig",
    "parse_config",
    "serialize_config",
    "load_config",
    "run_point",
    "run_experiment",
    "adjudicate",
]

GENERATORS = ("naive", "thinned", "auto")
POLICY_CHOICES = ("as-stated", "size-biased", "both")
CI_LEVEL = 0.99


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class ExperimentConfig:
    n: tuple
    alpha: tuple
    beta: float = 1.0
    c: float = 1.0
    f: WeightSpec = point_mass(1.0)
    h: WeightSpec = point_mass(1.0)
    replicates: int = 1
    vertices_per_replicate: int = None  # None harvests every vertex
    seed: int = 0
    generator: str = "auto"
    policy: str = "as-stated"
    k_max: int = 50
    limit_samples: int = 200_000
    output_dir: str = "out"

    def points(self):
        return [(n, a) for a in self.alpha for n in self.n]

    @property
    def policies(self):
        return ("as-stated", "size-biased") if self.policy == "both" else (self.policy,)


# ---------------------------------------------------------------------------
# parsing
# ---------------------------------------------------------------------------

def _int(text):
    value = float(text)
    if not value.is_integer():
        raise ValueError(f"{text!r} is not an integer")
    return int(text) if text.lstrip("+-").isdigit() else int(value)


def _list(conv):
    def parse(text):
        values = tuple(conv(s.strip()) for s in text.split(","))
        if not values or any(b <= a for a, b in zip(values, values[1:])):
            raise ValueError("list must be nonempty and strictly increasing")
        return values
    return parse


def _vertices(text):
    return None if text == "all" else _int(text)


def _choice(options):
    def parse(text):
        if text not in options:
            raise ValueError(f"expected one of {options}")
        return text
    return parse


_PARSERS = {
    "n": _list(_int),
    "alpha": _list(float),
    "beta": float,
    "c": float,
    "f": WeightSpec.from_text,
    "h": WeightSpec.from_text,
    "replicates": _int,
    "vertices_per_replicate": _vertices,
    "seed": _int,
    "generator": _choice(GENERATORS),
    "policy": _choice(POLICY_CHOICES),
    "k_max": _int,
    "limit_samples": _int,
    "output_dir": str,
}
REQUIRED = ("n", "alpha")


def _check(cfg, lines):
    def fail(key, msg):
        where = f" (line {lines[key][0]}: {lines[key][1]!r})" if key in lines else ""
        raise ConfigError(f"{key}: {msg}{where}")

    if any(n < 1 for n in cfg.n):
        fail("n", "must be >= 1")
    if any(not (math.isfinite(a) and a > 0) for a in cfg.alpha):
        fail("alpha", "must be positive")
    for key in ("beta", "c"):
        value = getattr(cfg, key)
        if not (math.isfinite(value) and value > 0):
            fail(key, "must be positive")
    if cfg.replicates < 1:
        fail("replicates", "must be >= 1")
    if cfg.vertices_per_replicate is not None:
        if cfg.vertices_per_replicate < 1 or cfg.vertices_per_replicate > min(cfg.n):
            fail("vertices_per_replicate", f"must be in [1, {min(cfg.n)}] or 'all'")
    if cfg.seed < 0:
        fail("seed", "must be >= 0")
    if cfg.k_max < 1:
        fail("k_max", "must be >= 1")
    if cfg.limit_samples < 1:
        fail("limit_samples", "must be >= 1")


def parse_config(text):
    """Parse config text strictly; unknown, duplicate or missing keys raise."""
    values, lines = {}, {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, eq, value = line.partition("=")
        key, value = key.strip(), value.strip()
        if not eq or not key:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {raw!r}")
        if key not in _PARSERS:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        if key in values:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        try:
            values[key] = _PARSERS[key](value)
        except ValueError as exc:
            raise ConfigError(f"line {lineno}: bad value for {key!r}: {exc}") from None
        lines[key] = (lineno, raw)
    missing = [k for k in REQUIRED if k not in values]
    if missing:
        raise ConfigError(f"missing required key(s): {', '.join(missing)}")
    cfg = ExperimentConfig(**values)
    _check(cfg, lines)
    return cfg


def _format(value):
    if isinstance(value, tuple):
        return ", ".join(_format(v) for v in value)
    if isinstance(value, WeightSpec):
        return value.to_text()
    if value is None:
        return "all"
    return repr(value) if isinstance(value, float) else str(value)


def serialize_config(cfg):
    """Canonical text form; ``parse_config(serialize_config(cfg)) == cfg``."""
    return "".join(f"{fd.name} = {_format(getattr(cfg, fd.name))}\n" for fd in fields(cfg))


def load_config(path):
    with open(path) as fh:
        return parse_config(fh.read())


# ---------------------------------------------------------------------------
# running
# ---------------------------------------------------------------------------

def _finite(x):
    if isinstance(x, float) and not math.isfinite(x):
        return "inf" if x > 0 else "-inf" if x < 0 else "nan"
    return x


def _replicate_seed(seed, point, replicate):
    return int(stream(seed, "replicate", point, replicate).integers(2**63))


def _one_replicate(cfg, params, generator, point, r):
    rseed = _replicate_seed(cfg.seed, point, r)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", HypothesisWarning)
        weights = draw_weights(params, cfg.f, cfg.h, rseed)
    if generator == "naive":
        bip = generate_naive(params, weights, rseed)
    else:
        bip = generate_thinned(params, weights, rseed)
    degree, below, above = degree_array(bip, params.n ** 0.25)
    take = slice(None) if cfg.vertices_per_replicate is None else slice(0, cfg.vertices_per_replicate)
    return degree[take], below[take], above[take], int(np.count_nonzero(bip.vertex_degrees()[take] == 0))


def _law_for(params, cfg, policy):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", HypothesisWarning)
        if cfg.f.kind == "pointmass":
            return limiting_law(params, cfg.f.value, cfg.h, policy, f=cfg.f)
        return limiting_law(params, None, cfg.h, policy, f=cfg.f)


def run_point(cfg, point, n, alpha, threads=1):
    """Simulate one parameter point; returns ``(summary dict, csv text)``."""
    params = ModelParams(n, alpha, cfg.beta, cfg.c)
    notes = []
    generator = cfg.generator
    if generator == "auto":
        generator = "naive" if n * params.m <= NAIVE_BUDGET else "thinned"
    elif generator == "naive" and n * params.m > NAIVE_BUDGET:
        generator = "thinned"
        notes.append(f"naive generation needs {n * params.m} pair evaluations; switched to thinned")

    def work(r):
        return _one_replicate(cfg, params, generator, point, r)

    if threads > 1 and cfg.replicates > 1:
        with ThreadPoolExecutor(threads) as pool:
            parts = list(pool.map(work, range(cfg.replicates)))
    else:
        parts = [work(r) for r in range(cfg.replicates)]
    degrees = np.concatenate([p[0] for p in parts])
    below = np.concatenate([p[1] for p in parts])
    above = np.concatenate([p[2] for p in parts])
    no_elements = sum(p[3] for p in parts)
    emp = stats.empirical_degree_pmf(degrees)
    mean, half = stats.mean_ci(degrees, CI_LEVEL)

    report = check_theorem_conditions(params, cfg.f, cfg.h)
    if not report.theorem_ok:
        notes.append("theorem hypotheses violated; limit laws are formal")
    a_mean = cfg.f.mean
    try:
        limit_mean = expected_degree_limit(cfg.c, a_mean, cfg.beta, cfg.h)
    except ValueError as exc:
        limit_mean = None
        notes.append(str(exc))

    laws = {}
    columns = []
    for policy in cfg.policies:
        law = _law_for(params, cfg, policy)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            seed = int(stream(cfg.seed, "limit", point, policy).integers(2**63))
            lp = pmf(law, cfg.k_max, samples=cfg.limit_samples, seed=seed)
        entry = {"law": law.to_dict(), "pmf_exact": lp.exact, "tail": lp.tail}
        entry["tv"] = stats.tv_distance(emp, lp.probs, lp.tail)
        try:
            entry["gof"] = stats.gof_report(emp, lp.probs, lp.tail)
        except ValueError as exc:
            entry["gof"] = {"error": str(exc)}
        laws[policy] = entry
        columns.append(lp)

    total = degrees.size
    k_max = cfg.k_max
    counts = np.zeros(k_max + 2, dtype=np.int64)
    clipped = np.bincount(np.minimum(degrees, k_max + 1), minlength=k_max + 2)
    counts[:] = clipped
    header = "k,empirical,theoretical" + (",theoretical_sb" if len(columns) == 2 else "")
    rows = [header]
    for k in range(k_max + 1):
        cells = [str(k), repr(float(counts[k] / total))] + [repr(float(lp.probs[k])) for lp in columns]
        rows.append(",".join(cells))
    rows.append(",".join([f">{k_max}", repr(float(counts[-1] / total))] + [repr(float(lp.tail)) for lp in columns]))
    csv_text = "\n".join(rows) + "\n"

    summary = {
        "point": point,
        "params": {"n": n, "alpha": alpha, "beta": cfg.beta, "c": cfg.c, "m": params.m},
        "regime": params.regime,
        "generator": generator,
        "notes": notes,
        "n_samples": int(total),
        "empirical_mean": mean,
        "empirical_mean_ci": {"level": CI_LEVEL, "half_width": half},
        "expected_degree_limit": _finite(limit_mean),
        "isolated_fraction": stats.isolated_fraction(degrees),
        "no_element_fraction": no_elements / total,
        "truncation": {
            "threshold": n ** 0.25,
            "mean_below": float(below.mean()),
            "mean_above": float(above.mean()),
        },
        "conditions": report.to_dict(),
        "laws": laws,
        "replicate_seeds": [_replicate_seed(cfg.seed, point, r) for r in range(cfg.replicates)],
    }
    return summary, csv_text


def _dump(obj):
    return json.dumps(obj, sort_keys=True, indent=2, allow_nan=False) + "\n"


def _normalized(cfg):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", HypothesisWarning)
        return replace(cfg, f=normalize_to_unit_mean(cfg.f), h=normalize_to_unit_mean(cfg.h))


def _stem(point, n, alpha):
    return f"point{point:02d}_n{n}_alpha{alpha!r}"


def run_experiment(cfg, out_dir=None, threads=1):
    """Run every point of ``cfg`` and write CSV and JSON reports.

    Weight laws with finite mean are rescaled to mean one first. Returns the
    written paths in order.
    """
    out_dir = cfg.output_dir if out_dir is None else out_dir
    os.makedirs(out_dir, exist_ok=True)
    run_cfg = _normalized(cfg)
    provenance = {
        "config": serialize_config(cfg),
        "normalized_f": run_cfg.f.to_text(),
        "normalized_h": run_cfg.h.to_text(),
        "seed": cfg.seed,
    }
    paths = []
    for point, (n, alpha) in enumerate(cfg.points()):
        summary, csv_text = run_point(run_cfg, point, n, alpha, threads)
        summary["provenance"] = provenance
        stem = os.path.join(out_dir, _stem(point, n, alpha))
        with open(stem + ".csv", "w", newline="") as fh:
            fh.write(csv_text)
        with open(stem + ".json", "w") as fh:
            fh.write(_dump(summary))
        paths += [stem + ".csv", stem + ".json"]
    return paths


def adjudicate(cfg, out_dir=None, threads=1):
    """Compare the as-stated and size-biased limit laws on simulated degrees.

    Writes ``adjudication.json`` with, per point, the TV distance to each
    law, the empirical mean and the three candidate means. It reports
    numbers only.
    """
    run_cfg = replace(_normalized(cfg), policy="both")
    h = run_cfg.h
    if not h.moment(2) > h.mean ** 2 * (1 + 1e-12):
        raise ValueError("H has zero variance: variants coincide; adjudication vacuous")
    if any(a < 1 for a in run_cfg.alpha):
        raise ValueError("for alpha < 1 both variants are the point mass at 0; adjudication vacuous")
    out_dir = cfg.output_dir if out_dir is None else out_dir
    os.makedirs(out_dir, exist_ok=True)
    points = []
    for point, (n, alpha) in enumerate(run_cfg.points()):
        summary, csv_text = run_point(run_cfg, point, n, alpha, threads)
        laws = summary["laws"]
        a = run_cfg.f.mean
        points.append({
            "params": summary["params"],
            "n_samples": summary["n_samples"],
            "empirical_mean": summary["empirical_mean"],
            "empirical_mean_ci": summary["empirical_mean_ci"],
            "mean_as_stated": laws["as-stated"]["law"]["mean"],
            "mean_size_biased": laws["size-biased"]["law"]["mean"],
            "mean_expected_degree_limit": cfg.c**2 * a * cfg.beta * h.moment(2),
            "tv_as_stated": laws["as-stated"]["tv"],
            "tv_size_biased": laws["size-biased"]["tv"],
            "gof_as_stated": laws["as-stated"]["gof"],
            "gof_size_biased": laws["size-biased"]["gof"],
            "law_as_stated": laws["as-stated"]["law"]["label"],
            "law_size_biased": laws["size-biased"]["law"]["label"],
        })
        with open(os.path.join(out_dir, "adjudication_" + _stem(point, n, alpha) + ".csv"), "w") as fh:
            fh.write(csv_text)
    report = {"config": serialize_config(cfg), "points": points}
    path = os.path.join(out_dir, "adjudication.json")
    with open(path, "w") as fh:
        fh.write(_dump(report))
    return report, path
