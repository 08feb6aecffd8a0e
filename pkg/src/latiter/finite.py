"""
Exact brute-force checks of fixed-point theory on small finite lattices.

Maps are stored as tuples of element indices, so every statement is decided
by enumeration with no rounding anywhere.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass, field

import numpy as np

from .errors import NotMonotone, TooLarge
from .lattice import FiniteLattice

#: refuse exhaustive enumeration above this many candidate maps
ENUMERATION_LIMIT = 10**7
DEFAULT_SEED = 20240607


class FiniteMonotoneMap:
    """A self-map of a finite lattice; ``images[i]`` is the index of the image of element ``i``.

    Despite the name the map need not be monotone (``monotone`` says whether
    it is), so order-reversing counterexamples fit here too.
    """

    def __init__(self, lattice: FiniteLattice, images):
        if isinstance(images, dict):
            images = [lattice._idx(images[e]) for e in lattice.elements]
        images = tuple(int(i) for i in images)
        if len(images) != len(lattice):
            raise ValueError(f"map needs {len(lattice)} images, got {len(images)}")
        if any(not 0 <= i < len(lattice) for i in images):
            raise ValueError("image index out of range")
        self.lattice = lattice
        self.images = images

    @classmethod
    def from_labels(cls, lattice, mapping: dict):
        missing = [e for e in lattice.elements if e not in mapping]
        if missing:
            raise ValueError(f"map is not total; no image for {missing}")
        return cls(lattice, mapping)

    @classmethod
    def identity(cls, lattice):
        return cls(lattice, range(len(lattice)))

    @classmethod
    def constant(cls, lattice, label):
        return cls(lattice, [lattice._idx(label)] * len(lattice))

    def __call__(self, label):
        return self.lattice.elements[self.images[self.lattice._idx(label)]]

    def __eq__(self, other):
        return (
            isinstance(other, FiniteMonotoneMap)
            and other.images == self.images
            and (
                other.lattice is self.lattice
                or (
                    other.lattice.elements == self.lattice.elements
                    and np.array_equal(other.lattice.leq, self.lattice.leq)
                )
            )
        )

    def __hash__(self):
        return hash(self.images)

    def __repr__(self):
        pairs = ", ".join(f"{e}->{self(e)}" for e in self.lattice.elements)
        return f"FiniteMonotoneMap({pairs})"

    def as_dict(self):
        return {e: self(e) for e in self.lattice.elements}

    @property
    def monotone(self) -> bool:
        return self.monotone_witness() is None

    def monotone_witness(self):
        """A pair (x, y) with x ⪯ y but f(x) not ⪯ f(y), or None."""
        leq = self.lattice.leq
        img = self.images
        for i, j in zip(*np.nonzero(leq)):
            if not leq[img[i], img[j]]:
                return self.lattice.elements[i], self.lattice.elements[j]
        return None

    def compose(self, g: "FiniteMonotoneMap") -> "FiniteMonotoneMap":
        return FiniteMonotoneMap(self.lattice, [self.images[i] for i in g.images])

    def iterate(self, k: int) -> "FiniteMonotoneMap":
        out = FiniteMonotoneMap.identity(self.lattice)
        for _ in range(k):
            out = self.compose(out)
        return out

    def leq(self, other: "FiniteMonotoneMap") -> bool:
        leq = self.lattice.leq
        return all(leq[a, b] for a, b in zip(self.images, other.images))


def _require_monotone(f: FiniteMonotoneMap):
    w = f.monotone_witness()
    if w is not None:
        raise NotMonotone(w)


def fixed_points(f: FiniteMonotoneMap) -> tuple:
    """Labels x with f(x) = x, in lattice order."""
    return tuple(e for i, e in enumerate(f.lattice.elements) if f.images[i] == i)


def tarski_extremes(f: FiniteMonotoneMap):
    """(x_*, x^*) from the infimum of pre-fixed and supremum of post-fixed points.

    Both are checked to be the least and greatest fixed point.
    """
    _require_monotone(f)
    lat = f.lattice
    n = len(lat)
    pre = [i for i in range(n) if lat.leq[f.images[i], i]]
    post = [i for i in range(n) if lat.leq[i, f.images[i]]]
    lo = lat.inf_indices(pre)
    hi = lat.sup_indices(post)
    fix = [i for i in range(n) if f.images[i] == i]
    if f.images[lo] != lo or f.images[hi] != hi:
        raise RuntimeError("Tarski formula produced a non-fixed point; lattice tables inconsistent")
    if not all(lat.leq[lo, x] and lat.leq[x, hi] for x in fix):
        raise RuntimeError("Tarski extremes are not the extreme fixed points")
    return lat.elements[lo], lat.elements[hi]


def kleene_trace(f: FiniteMonotoneMap, start: str = "bottom") -> list:
    """Labels visited by x ← f(x) from bottom (or top) until stationary."""
    _require_monotone(f)
    lat = f.lattice
    x = lat.bottom_index if start == "bottom" else lat.top_index
    trace = [x]
    while f.images[x] != x:
        x = f.images[x]
        trace.append(x)
    return [lat.elements[i] for i in trace]


def kleene_least(f: FiniteMonotoneMap):
    x = kleene_trace(f, "bottom")[-1]
    if x != tarski_extremes(f)[0]:
        raise RuntimeError("Kleene ascent disagrees with the least fixed point")
    return x


def kleene_greatest(f: FiniteMonotoneMap):
    x = kleene_trace(f, "top")[-1]
    if x != tarski_extremes(f)[1]:
        raise RuntimeError("Kleene descent disagrees with the greatest fixed point")
    return x


@dataclass(frozen=True)
class FixedPointStructure:
    fixed: tuple
    induced_complete: bool
    sublattice_of_X: bool
    witness: tuple | None = None


def fixed_point_structure(f: FiniteMonotoneMap) -> FixedPointStructure:
    """Check completeness of Fix(f) in the induced order and closure under the joins/meets of X."""
    _require_monotone(f)
    lat = f.lattice
    fix = [i for i in range(len(lat)) if f.images[i] == i]
    leq = lat.leq

    def has_least(cands):
        return any(all(leq[c, d] for d in cands) for c in cands)

    def has_greatest(cands):
        return any(all(leq[d, c] for d in cands) for c in cands)

    complete = bool(fix)
    for r in range(len(fix) + 1):
        if not complete:
            break
        for sub in itertools.combinations(fix, r):
            ub = [u for u in fix if all(leq[s, u] for s in sub)]
            lb = [u for u in fix if all(leq[u, s] for s in sub)]
            if not (has_least(ub) and has_greatest(lb)):
                complete = False
                break

    witness = None
    fixset = set(fix)
    for x, y in itertools.combinations(fix, 2):
        j, m = int(lat.join_table[x, y]), int(lat.meet_table[x, y])
        if j not in fixset:
            witness = ("join", lat.elements[x], lat.elements[y], lat.elements[j])
            break
        if m not in fixset:
            witness = ("meet", lat.elements[x], lat.elements[y], lat.elements[m])
            break
    return FixedPointStructure(
        fixed=tuple(lat.elements[i] for i in fix),
        induced_complete=complete,
        sublattice_of_X=witness is None,
        witness=witness,
    )


# ---------------------------------------------------------------------------
# enumeration


def _backtrack(lat: FiniteLattice, order_fn):
    n = len(lat)
    leq = lat.leq
    below = [[j for j in range(i) if leq[j, i]] for i in range(n)]
    above = [[j for j in range(i) if leq[i, j]] for i in range(n)]
    imgs = [0] * n

    def rec(i):
        if i == n:
            yield tuple(imgs)
            return
        for v in order_fn(i):
            if all(leq[imgs[j], v] for j in below[i]) and all(leq[v, imgs[j]] for j in above[i]):
                imgs[i] = v
                yield from rec(i + 1)

    return rec(0)


def enumerate_monotone_maps(lat: FiniteLattice, limit: int = ENUMERATION_LIMIT):
    """Yield every monotone self-map, lexicographically by image tuple."""
    n = len(lat)
    if n**n > limit:
        raise TooLarge(f"{n}^{n} candidate maps exceeds the limit {limit}")
    for imgs in _backtrack(lat, lambda i: range(n)):
        yield FiniteMonotoneMap(lat, imgs)


def sample_monotone_maps(lat: FiniteLattice, count: int, seed: int = DEFAULT_SEED) -> list:
    """``count`` random monotone maps (not uniform; reproducible for a seed).

    Every partial monotone assignment on a lattice extends, so the randomized
    backtracking never dead-ends.
    """
    rng = random.Random(seed)
    n = len(lat)
    out = []
    for _ in range(count):
        def order(i):
            vs = list(range(n))
            rng.shuffle(vs)
            return vs

        out.append(FiniteMonotoneMap(lat, next(_backtrack(lat, order))))
    return out


# ---------------------------------------------------------------------------
# iteration laws


@dataclass
class LawReport:
    lattice_size: int
    maps: int
    pairs: int
    k_max: int
    premises: dict = field(default_factory=lambda: {"ii": 0, "iii": 0, "iv": 0})
    violations: dict = field(default_factory=lambda: {"i": [], "ii": [], "iii": [], "iv": []})
    sampled: bool = False

    @property
    def ok(self) -> bool:
        return not any(self.violations.values())

    def summary(self) -> str:
        counts = ", ".join(f"({c}) {len(v)}" for c, v in self.violations.items())
        return (
            f"{self.maps} monotone maps, {self.pairs} ordered pairs, k <= {self.k_max}; "
            f"violations: {counts}; "
            + ("all iteration laws hold" if self.ok else "LAW VIOLATED")
        )


def check_iteration_laws(
    lat: FiniteLattice, k_max: int = 4, sample: int | None = None, seed: int = DEFAULT_SEED
) -> LawReport:
    """Check the four iteration laws over all (or sampled) pairs of monotone maps.

    (i) f^k is monotone; (ii) f ⊴ g ⇒ f^k ⊴ g^k; (iii) f∘g ⊴ g∘f ⇒ f∘g^k ⊴ g^k∘f;
    (iv) f∘g ⊴ g∘f and f(x) ⪯ g(x) ⇒ f^k(x) ⪯ g^k(x).
    """
    n = len(lat)
    if sample is None:
        try:
            maps = [np.array(m.images) for m in enumerate_monotone_maps(lat)]
        except TooLarge:
            raise TooLarge(f"lattice of size {n} needs sampling; pass sample=N") from None
        pairs = list(itertools.product(range(len(maps)), repeat=2))
    else:
        maps = [np.array(m.images) for m in sample_monotone_maps(lat, sample, seed)]
        rng = random.Random(seed + 1)
        pairs = [(rng.randrange(len(maps)), rng.randrange(len(maps))) for _ in range(sample * 4)]

    leq = lat.leq
    rep = LawReport(lattice_size=n, maps=len(maps), pairs=len(pairs), k_max=k_max, sampled=sample is not None)
    ident = np.arange(n)
    powers = []
    for f in maps:
        p = [ident]
        for _ in range(k_max):
            p.append(f[p[-1]])
        powers.append(p)
    le_pairs = np.argwhere(leq)

    for fi, f in enumerate(maps):
        for k in range(1, k_max + 1):
            fk = powers[fi][k]
            if not leq[fk[le_pairs[:, 0]], fk[le_pairs[:, 1]]].all():
                rep.violations["i"].append((fi, k))

    for fi, gi in pairs:
        f, g = maps[fi], maps[gi]
        pf, pg = powers[fi], powers[gi]
        if leq[f, g].all():
            rep.premises["ii"] += 1
            for k in range(1, k_max + 1):
                if not leq[pf[k], pg[k]].all():
                    rep.violations["ii"].append((fi, gi, k))
        if leq[f[g], g[f]].all():
            rep.premises["iii"] += 1
            xs = np.flatnonzero(leq[f, g])
            if len(xs):
                rep.premises["iv"] += 1
            for k in range(1, k_max + 1):
                if not leq[f[pg[k]], pg[k][f]].all():
                    rep.violations["iii"].append((fi, gi, k))
                if len(xs) and not leq[pf[k][xs], pg[k][xs]].all():
                    rep.violations["iv"].append((fi, gi, k))
    return rep


# ---------------------------------------------------------------------------
# sweeps and reports


@dataclass
class MapFinding:
    map: FiniteMonotoneMap
    fixed: tuple
    monotone: bool
    least: object = None
    greatest: object = None
    kleene_least: object = None
    kleene_greatest: object = None
    structure: FixedPointStructure | None = None

    def lines(self) -> list:
        f = self.map
        out = [f"map: {', '.join(f'{e} -> {f(e)}' for e in f.lattice.elements)}"]
        out.append(f"  order-preserving: {self.monotone}")
        if self.fixed:
            out.append(f"  fixed points: {' '.join(map(str, self.fixed))}")
        else:
            out.append("  fixed points: none")
        if self.monotone:
            out.append(f"  least fixed point x_* = {self.least}; greatest x^* = {self.greatest}")
            out.append(f"  kleene from bottom: {' -> '.join(map(str, kleene_trace(f, 'bottom')))}")
            out.append(f"  kleene from top: {' -> '.join(map(str, kleene_trace(f, 'top')))}")
            s = self.structure
            out.append(
                f"  fixed set complete in induced order: {s.induced_complete}; "
                f"sublattice of X: {s.sublattice_of_X}"
                + (f" (witness: {s.witness[0]} of {s.witness[1]}, {s.witness[2]} is {s.witness[3]})" if s.witness else "")
            )
        elif not self.fixed:
            out.append("  no fixed points; map is not order-preserving")
        return out


def analyze_map(f: FiniteMonotoneMap) -> MapFinding:
    fixed = fixed_points(f)
    if not f.monotone:
        return MapFinding(f, fixed, False)
    lo, hi = tarski_extremes(f)
    return MapFinding(
        f,
        fixed,
        True,
        least=lo,
        greatest=hi,
        kleene_least=kleene_least(f),
        kleene_greatest=kleene_greatest(f),
        structure=fixed_point_structure(f),
    )


@dataclass
class SweepReport:
    lattice_size: int
    maps: int = 0
    nonempty: int = 0
    extremes_ok: int = 0
    kleene_ok: int = 0
    induced_complete: int = 0
    sublattice: int = 0
    non_sublattice_examples: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return self.maps == self.nonempty == self.extremes_ok == self.kleene_ok == self.induced_complete


def tarski_sweep(lat: FiniteLattice) -> SweepReport:
    """Run every fixed-point check over all monotone self-maps of ``lat``."""
    rep = SweepReport(len(lat))
    for f in enumerate_monotone_maps(lat):
        rep.maps += 1
        fix = fixed_points(f)
        rep.nonempty += bool(fix)
        lo, hi = tarski_extremes(f)
        lat_fix = [lat._idx(x) for x in fix]
        if (
            lo in fix
            and hi in fix
            and all(lat.leq[lat._idx(lo), x] and lat.leq[x, lat._idx(hi)] for x in lat_fix)
        ):
            rep.extremes_ok += 1
        if kleene_trace(f, "bottom")[-1] == lo and kleene_trace(f, "top")[-1] == hi:
            rep.kleene_ok += 1
        s = fixed_point_structure(f)
        rep.induced_complete += s.induced_complete
        rep.sublattice += s.sublattice_of_X
        if not s.sublattice_of_X and len(rep.non_sublattice_examples) < 3:
            rep.non_sublattice_examples.append((f, s.witness))
    return rep


def parse_map_text(lat: FiniteLattice, text: str) -> FiniteMonotoneMap:
    """Parse ``x -> y`` lines (``#`` comments allowed) into a map on ``lat``."""
    mapping = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        src, arrow, dst = line.partition("->")
        if not arrow:
            raise ValueError(f"line {lineno}: expected 'x -> y'")
        src, dst = src.strip(), dst.strip()
        lat._idx(src), lat._idx(dst)
        if src in mapping:
            raise ValueError(f"line {lineno}: {src} mapped twice")
        mapping[src] = dst
    return FiniteMonotoneMap.from_labels(lat, mapping)
