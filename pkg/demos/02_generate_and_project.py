# coding: utf-8

# # Sampling the bipartite graph and projecting it
#
# Two generators produce the same law. The naive one flips a coin for every
# pair and is kept as a reference. The thinned one draws candidates at a
# per-row capped rate by geometric skipping and accepts each with p / cap.

# In[1]:

import time

import numpy as np

from rig import ModelParams, draw_weights, exponential
from rig.genbip import generate_naive, generate_thinned
from rig.project import degree_array, split_degree_by_weight_threshold

params = ModelParams(n=2000, alpha=1.0, beta=1.0, c=1.0)
w = draw_weights(params, exponential(), exponential(), seed=1)


# In[2]:

for gen in (generate_naive, generate_thinned):
    start = time.perf_counter()
    bip = gen(params, w, seed=3)
    print(gen.__name__, bip.num_edges, f"{time.perf_counter() - start:.3f}s")


# Single draws differ because the generators use different random streams.
# Averaged over seeds, both match the sum of the clamped probabilities.

# In[3]:

p = np.minimum(params.scale * np.outer(w.vertex_weights, w.element_weights), 1.0)
for gen in (generate_naive, generate_thinned):
    counts = [gen(params, w, seed=s).num_edges for s in range(200)]
    print(gen.__name__, np.mean(counts))
print("expected", p.sum(), "sd of one draw", np.sqrt((p * (1 - p)).sum()))


# # Degrees in the intersection graph
#
# Two vertices are adjacent when they share an element. Degrees come from
# per-vertex unions of element member lists; cliques are never stored.

# In[4]:

degrees = degree_array(bip)
np.bincount(degrees)[:10] / params.n


# The split at n**0.25 separates neighbours by their own weight.

# In[5]:

records = split_degree_by_weight_threshold(bip)
below = np.mean([r.below for r in records])
above = np.mean([r.above for r in records])
below, above


# # Scaling up
#
# For alpha = 1.5 and n = 20000 there are 2.8 million elements, so the naive
# generator would need 5.7e10 coin flips. The thinned generator's work is
# proportional to the number of edges.

# In[6]:

big = ModelParams(n=20000, alpha=1.5, beta=1.0, c=1.0)
wb = draw_weights(big, exponential(), exponential(), seed=2)
start = time.perf_counter()
bip = generate_thinned(big, wb, seed=2, threads=4)
bip.num_edges, f"{time.perf_counter() - start:.2f}s"
