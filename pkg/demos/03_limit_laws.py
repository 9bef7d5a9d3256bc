# coding: utf-8

# # Limiting degree laws
#
# Conditioned on its weight a, a vertex's degree converges to
#
# * the point mass at 0 when alpha < 1,
# * a compound Poisson law when alpha = 1: Poisson(c a beta) many groups, each of
#   size Poisson(c B),
# * a mixed Poisson law Poisson(c^2 a beta B) when alpha > 1.

# In[1]:

import numpy as np

from rig import ModelParams, two_point
from rig.limits import limiting_law, pmf, prelimit_law

h = two_point(0.5, 0.5, 1.5)


# In[2]:

for alpha in (0.5, 1.0, 1.5):
    law = limiting_law(ModelParams(1000, alpha, 1.0, 1.0), 1.0, h)
    print(alpha, law.label, "mean", law.mean)


# The exact pmf is available whenever H has finite support. Its value at 0
# agrees with the generating function at t = 0.

# In[3]:

law = limiting_law(ModelParams(1000, 1.0, 1.0, 1.0), 1.0, h)
res = pmf(law, 30)
print(np.round(res.probs[:8], 5), res.tail)
res.probs[0], law.pgf(0.0)


# # How fast is the alpha > 1 limit reached?
#
# At finite n the degree law is itself compound Poisson, with n**0.25 times as
# many groups as the alpha = 1 case, each n**0.25 times smaller. The distance to
# the Poisson limit shrinks slowly.

# In[4]:

from rig import point_mass
from rig.stats import tv_distance

limit = pmf(limiting_law(ModelParams(10, 1.5, 1.0, 1.0), 1.0, point_mass()), 60)
for n in (10**3, 10**4, 2 * 10**4, 10**5, 10**6):
    finite = pmf(prelimit_law(ModelParams(n, 1.5, 1.0, 1.0), 1.0, point_mass()), 60)
    print(n, round(tv_distance(finite.probs, limit.probs, finite.tail), 5))
