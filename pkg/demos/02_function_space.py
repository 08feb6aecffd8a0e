"""A functional equation on maps [0,1] -> [0,1], discretized as a box.

A map phi is recorded by its values at n sample points t_i, so the domain
becomes [0,1]^n with the product order. The data F(phi)_i = (t_i + phi_i)/5
only couples coordinate i with itself, so the solver stores every map in
diagonal form: one column of node values per coordinate.

    python demos/02_function_space.py
"""

import numpy as np

from latiter import solve
from latiter.config import build_F, builtin_examples

cfg = builtin_examples()[3]
F = build_F(cfg)
print(type(F).__name__, "on", cfg.dim, "coordinates,", cfg.resolution[0], "nodes per axis")
print("dense grid would have", F.grid.n_nodes, "nodes")

rep = solve(F, cfg.coeffs)
print("iterations", rep.iterations_min, rep.iterations_max)
print("residual", float(rep.residual_min.max()), float(rep.residual_max.max()))

# Evaluate the solution at the constant map phi = 1/2.
phi = np.full(cfg.dim, 0.5)
print("f_*(1/2, ..., 1/2)[:5] =", rep.f_star_min.eval(phi)[:5])
print("minimal and maximal solutions differ by", rep.distance)
