"""Iteration laws for order-preserving maps, checked by brute force.

(i)   f^k is order-preserving
(ii)  f ⊴ g implies f^k ⊴ g^k
(iii) f∘g ⊴ g∘f implies f∘g^k ⊴ g^k∘f
(iv)  under (iii), f(x) ⪯ g(x) implies f^k(x) ⪯ g^k(x)

    python demos/04_iteration_laws.py
"""

from latiter.finite import check_iteration_laws
from latiter.lattice import chain, diamond, m3

for name, lat in [("3-chain", chain(3)), ("diamond", diamond()), ("M3", m3())]:
    rep = check_iteration_laws(lat, k_max=4)
    print(f"{name:8s}", rep.summary())
    print("         pairs meeting each premise:", rep.premises)

# Larger lattices are sampled with a fixed seed.
print(check_iteration_laws(chain(7), sample=200).summary())
