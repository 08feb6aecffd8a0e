"""When is the solution unique?

With l1 > 0 and every other coefficient nonnegative, two solutions that are
comparable (or subcommute, or commute on a chain) must agree. The Kleene
solver needs the opposite sign pattern, so here a damped relaxation is used.

    python demos/05_uniqueness.py
"""

import numpy as np

from latiter import Coefficients, compare_solutions, residual
from latiter.maps import BoxGrid, GridMap, max_node_distance
from latiter.solver import check_uniqueness_conditions, solve_relaxed

grid = BoxGrid.unit(1, 65)
c = Coefficients((0.8, 0.2))
print(check_uniqueness_conditions(c))

# Manufacture a solution and recover it.
f = GridMap.from_function(grid, lambda x: 0.1 + 0.7 * x**2)
F = f.with_data(0.8 * f.data + 0.2 * f.compose(f).data)
g = solve_relaxed(F, c)
print("distance to the manufactured solution:", max_node_distance(f, g))
print(compare_solutions(f, g, F, c, tol=1e-8))

# In two dimensions incomparable solutions can coexist, and the uniqueness clauses have
# nothing to say about them.
sq = BoxGrid.unit(2, 3)
nodes = sq.nodes()
p = GridMap(sq, nodes[[0, 0, 0, 0, 0, 3, 0, 1, 5]])
q = GridMap(sq, nodes[[0, 0, 0, 0, 0, 3, 0, 1, 7]])
c2 = Coefficients((0.5, 0.5))
F2 = p.with_data(0.5 * p.data + 0.5 * p.compose(p).data)
print("residuals:", residual(p, F2, c2), residual(q, F2, c2))
print("p(1,1) =", p.eval([1, 1]), " q(1,1) =", q.eval([1, 1]))
print(compare_solutions(p, q, F2, c2, tol=1e-12))
print("as arrays:", np.vstack([p.data[-1], q.data[-1]]).tolist())
