"""Fixed points of order-preserving maps on small finite lattices.

Everything here is exact: maps are tuples of element indices.

    python demos/03_finite_tarski.py
"""

from latiter.finite import (
    FiniteMonotoneMap,
    analyze_map,
    enumerate_monotone_maps,
    fixed_point_structure,
    tarski_sweep,
)
from latiter.lattice import build_finite_lattice, diamond, small_lattice_catalog

d = diamond()
print(d, "bottom", d.bottom, "top", d.top)

# An order-preserving map always has a least and a greatest fixed point.
f = FiniteMonotoneMap.from_labels(d, {"a": "b", "b": "b", "c": "d", "d": "d"})
print("\n".join(analyze_map(f).lines()))

# Dropping monotonicity can remove every fixed point.
swap = FiniteMonotoneMap.from_labels(d, {"a": "d", "b": "c", "c": "b", "d": "a"})
print("\n".join(analyze_map(swap).lines()))
print("witness of non-monotonicity:", swap.monotone_witness())

# Sweep every monotone self-map of every lattice in the catalog.
for name, lat in small_lattice_catalog().items():
    rep = tarski_sweep(lat)
    print(f"{name:9s} {rep.maps:4d} maps  all checks ok: {rep.ok}  sublattice of X: {rep.sublattice}/{rep.maps}")

# The fixed set is always complete in its own order, but it need not be
# closed under the joins of the ambient lattice. The catalog lattices are
# too small to show this; a diamond with an extra top element is enough.
raised = build_finite_lattice(
    ["0", "a", "b", "c", "1"], [("0", "a"), ("0", "b"), ("a", "c"), ("b", "c"), ("c", "1")]
)
g = FiniteMonotoneMap.from_labels(raised, {"0": "0", "a": "a", "b": "b", "c": "1", "1": "1"})
print(fixed_point_structure(g))
print(sum(1 for _ in enumerate_monotone_maps(raised)), "monotone maps on the raised diamond")
