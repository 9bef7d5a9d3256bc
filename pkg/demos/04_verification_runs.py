# coding: utf-8

# # Checking simulation against the limits
#
# The experiment runner samples graphs, harvests degrees and writes a CSV of
# empirical and theoretical pmfs plus a JSON summary. The same run is also
# available as ``rig experiment --config FILE``.

# In[1]:

import json
import tempfile

from rig.experiment import adjudicate, parse_config, run_experiment

config = parse_config("""
n = 20000
alpha = 1
replicates = 10
""")
out = tempfile.mkdtemp()
csv_path, json_path = run_experiment(config, out, threads=4)
summary = json.load(open(json_path))
law = summary["laws"]["as-stated"]
law["tv"], law["gof"]["p_value"], summary["empirical_mean"]


# In[2]:

print(open(csv_path).read()[:300])


# # Two readings of the limit
#
# With a non-degenerate H the mean of the as-stated limit (c^2 a beta) and
# the mean formula c^2 a beta E(B^2) disagree. Size-biasing the element
# weight law restores agreement. The adjudication run reports the distance
# from the simulated degrees to both versions; it draws no conclusion.

# In[3]:

config = parse_config("""
n = 100000
alpha = 1
h = twopoint:x1=0.5,p1=0.5,x2=1.5
""")
report, path = adjudicate(config, out, threads=4)
point = report["points"][0]
{k: round(point[k], 4) for k in ("tv_as_stated", "tv_size_biased", "empirical_mean",
                                  "mean_as_stated", "mean_size_biased")}


# # Is B in the alpha > 1 limit random or fixed?
#
# Read literally, the alpha > 1 limit Poisson(c^2 a beta B) can mean a Poisson
# law mixed over B, or a plain Poisson law with B frozen at one value (a
# point-mass mixing variable). Each can use H itself or its size-biased
# version. The last line is the finite-n compound law with a size-biased
# summand, the law reached just before the final limit is taken.

# In[4]:

import csv

import numpy as np

from rig import ModelParams, point_mass
from rig.limits import LimitLaw, pmf, prelimit_law, size_biased
from rig.stats import tv_distance

config = parse_config("""
n = 20000
alpha = 1.5
h = twopoint:x1=0.5,p1=0.5,x2=1.5
replicates = 10
""")
csv_path, _ = run_experiment(config, out, threads=4)
rows = list(csv.reader(open(csv_path)))[1:-1]
emp = np.array([float(r[1]) for r in rows])
h = config.h
candidates = {
    "mixed over H": LimitLaw("mixed_poisson", 1.0, 0.0, h),
    "frozen at E(B) = 1": LimitLaw("mixed_poisson", 1.0, 0.0, point_mass(1.0)),
    "mixed over size-biased H": LimitLaw("mixed_poisson", 1.0, 0.0, size_biased(h)),
    "frozen at E(B^2) = 1.25": LimitLaw("mixed_poisson", 1.0, 0.0, point_mass(1.25)),
    "finite-n, size-biased": prelimit_law(ModelParams(20000, 1.5, 1.0, 1.0), 1.0, h, "size-biased"),
}
for name, law in candidates.items():
    res = pmf(law, len(emp) - 1)
    print(f"{name:26s} tv = {tv_distance(emp, res.probs, res.tail):.4f}")
