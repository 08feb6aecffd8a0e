"""Solve the three worked examples and look at the extremal solutions.

Each example is an equation  l1 f + l2 f∘f = F  for an order-preserving f.
Kleene iteration from the bottom map gives the minimal solution and from
the top map the maximal one; both are certified by their residuals.

    python demos/01_worked_examples.py
"""

import numpy as np

from latiter import build_G, residual, solve, validate_coefficients
from latiter.config import build_F, builtin_examples
from latiter.maps import p_integral

ex1, ex2, ex3, _ = builtin_examples()

# Example 1 lives on the unit square. The coefficients give alpha = 0.7 and
# G = F / 0.7 must stay in the box, which it does: sup G = (1/1.4, 2/2.1).
F1 = build_F(ex1)
a = validate_coefficients(ex1.coeffs)
print("alpha =", round(a.alpha, 12), " alphas =", np.round(a.alphas, 12))
print("sup G =", build_G(F1, ex1.coeffs).data.max(axis=0))

rep = solve(F1, ex1.coeffs, label=ex1.label)
print(rep.comparable_text())

# The residual is checked at the nodes; between nodes the interpolant is a
# second-order approximation.
pts = np.array([[0.3, 0.7], [0.9, 0.1], [1.0, 1.0]])
for p in pts:
    print(p, "->", rep.f_star_min.eval(p))

# Example 2 is one-dimensional. The origin is fixed by every iterate.
F2 = build_F(ex2)
f2 = solve(F2, ex2.coeffs).f_star_min
print("example-2: f_*(0) =", f2.eval([0.0])[0], " f_*(1) =", f2.eval([1.0])[0])
print("residual:", residual(f2, F2, ex2.coeffs))

# Example 3 also reports the integral of |F|^3, which is 1/448 exactly.
F3 = build_F(ex3)
rep3 = solve(F3, ex3.coeffs)
print("example-3: residual", rep3.residual_min, " int |F|^3 =", p_integral(F3, 3)[0], " 1/448 =", 1 / 448)
