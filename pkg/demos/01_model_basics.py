# coding: utf-8

# # The weighted random intersection graph
#
# n vertices and m = floor(beta * n**alpha) elements. Vertex i carries a weight
# A_i drawn from F, element j a weight B_j drawn from H, and the pair (i, j) is
# joined with probability min(c * A_i * B_j * n**(-(1 + alpha) / 2), 1).

# In[1]:

import numpy as np

from rig import ModelParams, check_theorem_conditions, draw_weights, edge_probability
from rig import exponential, normalize_to_unit_mean, pareto, point_mass


# The element count is exact for decimal inputs: 10**1.5 * 0.3 is 9.486..., so m = 9.

# In[2]:

params = ModelParams(n=10, alpha=1.5, beta=0.3, c=1.0)
params.m, params.regime


# Weight laws are normalized to mean one when the mean is finite.

# In[3]:

h = normalize_to_unit_mean(exponential(rate=3.0))
h, h.mean, h.moment(2)


# In[4]:

w = draw_weights(params, point_mass(), h, seed=7)
p = edge_probability(params, w.vertex_weights[:, None], w.element_weights[None, :])
print(np.round(p, 3))


# # Which limit statements apply?
#
# A Pareto law with index 2.5 has a finite mean and a finite second moment.
# At index 1.5 the second moment is infinite, so the alpha > 1 statement and
# the mean formula both lose their hypotheses.

# In[5]:

for index in (2.5, 1.5):
    report = check_theorem_conditions(ModelParams(1000, 1.5, 1.0, 1.0), point_mass(), pareto(1.0, index))
    print(index, report.theorem_ok, report.proposition_ok)
    for cond in report.entries:
        print("   ", cond.name, cond.satisfied)
