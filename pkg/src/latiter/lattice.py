"""
Order-theoretic foundations.

Partial-order comparison of real vectors (product and lexicographic order),
the box lattice ``[lower, upper]`` of R^n under the product order, and finite
lattices given by their Hasse diagram.
"""

from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass
from typing import Hashable, Iterable, Sequence

import numpy as np

from .errors import (
    CycleDetected,
    DimensionMismatch,
    NotALattice,
    OutsideBox,
    UnknownElement,
)


class OrderRel(enum.Enum):
    LESS = "less"
    EQUAL = "equal"
    GREATER = "greater"
    INCOMPARABLE = "incomparable"

    def flip(self) -> "OrderRel":
        if self is OrderRel.LESS:
            return OrderRel.GREATER
        if self is OrderRel.GREATER:
            return OrderRel.LESS
        return self


def _pair(x, y):
    x = np.asarray(x, dtype=float).reshape(-1)
    y = np.asarray(y, dtype=float).reshape(-1)
    if x.shape != y.shape:
        raise DimensionMismatch(f"cannot compare vectors of length {x.size} and {y.size}")
    return x, y


def compare_product(x, y) -> OrderRel:
    """Compare two points under the componentwise (product) order.

    >>> compare_product((1, 0), (0, 1))
    <OrderRel.INCOMPARABLE: 'incomparable'>
    """
    x, y = _pair(x, y)
    le = bool(np.all(x <= y))
    ge = bool(np.all(x >= y))
    if le and ge:
        return OrderRel.EQUAL
    if le:
        return OrderRel.LESS
    if ge:
        return OrderRel.GREATER
    return OrderRel.INCOMPARABLE


def product_leq(x, y) -> bool:
    x, y = _pair(x, y)
    return bool(np.all(x <= y))


def compare_lex(x, y) -> OrderRel:
    """Dictionary order: the first differing coordinate decides."""
    x, y = _pair(x, y)
    for a, b in zip(x, y):
        if a < b:
            return OrderRel.LESS
        if a > b:
            return OrderRel.GREATER
    return OrderRel.EQUAL


@dataclass(frozen=True)
class BoxLattice:
    """The box ``[lower, upper]`` in R^n with the product order.

    It is a convex complete sublattice of R^n; bottom is ``lower`` and top
    is ``upper``.
    """

    lower: tuple
    upper: tuple

    def __post_init__(self):
        lo = tuple(float(v) for v in np.atleast_1d(self.lower))
        hi = tuple(float(v) for v in np.atleast_1d(self.upper))
        if len(lo) != len(hi) or not lo:
            raise DimensionMismatch("box bounds must be non-empty and of equal length")
        if any(not np.isfinite(v) for v in lo + hi):
            raise ValueError("box bounds must be finite")
        if any(a > b for a, b in zip(lo, hi)):
            raise ValueError(f"empty box: lower {lo} is not below upper {hi}")
        object.__setattr__(self, "lower", lo)
        object.__setattr__(self, "upper", hi)

    @classmethod
    def unit(cls, dim: int) -> "BoxLattice":
        return cls((0.0,) * dim, (1.0,) * dim)

    @property
    def dim(self) -> int:
        return len(self.lower)

    @property
    def bottom(self) -> np.ndarray:
        return np.array(self.lower)

    @property
    def top(self) -> np.ndarray:
        return np.array(self.upper)

    def contains(self, x) -> bool:
        x = np.asarray(x, dtype=float)
        if x.shape[-1] != self.dim:
            raise DimensionMismatch(f"expected points of dimension {self.dim}")
        return bool(np.all((x >= self.bottom) & (x <= self.top)))

    def _check(self, *points):
        for p in points:
            if not self.contains(p):
                raise OutsideBox(f"point {tuple(np.atleast_1d(p))} is outside the box")

    def join(self, x, y) -> np.ndarray:
        x, y = _pair(x, y)
        self._check(x, y)
        return np.maximum(x, y)

    def meet(self, x, y) -> np.ndarray:
        x, y = _pair(x, y)
        self._check(x, y)
        return np.minimum(x, y)

    def sup(self, points) -> np.ndarray:
        """Join of a finite point set; the empty set gives the bottom corner."""
        pts = np.asarray(points, dtype=float).reshape(-1, self.dim)
        if len(pts) == 0:
            return self.bottom
        self._check(pts)
        return pts.max(axis=0)

    def inf(self, points) -> np.ndarray:
        pts = np.asarray(points, dtype=float).reshape(-1, self.dim)
        if len(pts) == 0:
            return self.top
        self._check(pts)
        return pts.min(axis=0)


# ---------------------------------------------------------------------------
# finite lattices


class FiniteLattice:
    """A finite poset given by its cover relation, with join and meet tables.

    Elements are addressed either by label or by integer index (the position
    in ``elements``). ``leq[i, j]`` is True iff element ``i`` is below ``j``.
    Join/meet tables hold ``-1`` where the pair has no join/meet; a poset
    with such entries is not a lattice (``is_lattice`` is False).
    """

    def __init__(self, elements: Sequence[Hashable], covers: Iterable[tuple] = ()):
        self.elements = tuple(elements)
        if len(set(self.elements)) != len(self.elements):
            raise ValueError("element labels must be distinct")
        self.index = {e: i for i, e in enumerate(self.elements)}
        self.covers = tuple((lo, hi) for lo, hi in covers)
        n = len(self.elements)

        leq = np.eye(n, dtype=bool)
        for lo, hi in self.covers:
            leq[self._idx(lo), self._idx(hi)] = True
        # Warshall closure
        for k in range(n):
            leq |= leq[:, k : k + 1] & leq[k : k + 1, :]
        both = leq & leq.T & ~np.eye(n, dtype=bool)
        if both.any():
            i, j = map(int, np.argwhere(both)[0])
            raise CycleDetected(
                f"covers contain a cycle through {self.elements[i]!r} and {self.elements[j]!r}"
            )
        leq.setflags(write=False)
        self.leq = leq

        self.join_table = np.full((n, n), -1, dtype=int)
        self.meet_table = np.full((n, n), -1, dtype=int)
        for i in range(n):
            for j in range(i, n):
                self.join_table[i, j] = self.join_table[j, i] = self._least(leq[i] & leq[j])
                self.meet_table[i, j] = self.meet_table[j, i] = self._greatest(
                    leq[:, i] & leq[:, j]
                )
        self.join_table.setflags(write=False)
        self.meet_table.setflags(write=False)

    def _least(self, mask):
        cand = np.flatnonzero(mask)
        for c in cand:
            if self.leq[c, cand].all():
                return int(c)
        return -1

    def _greatest(self, mask):
        cand = np.flatnonzero(mask)
        for c in cand:
            if self.leq[cand, c].all():
                return int(c)
        return -1

    def _idx(self, e) -> int:
        try:
            return self.index[e]
        except KeyError:
            raise UnknownElement(f"unknown element {e!r}") from None

    def __len__(self):
        return len(self.elements)

    def __repr__(self):
        return f"FiniteLattice({list(self.elements)!r}, covers={list(self.covers)!r})"

    # -- structure ---------------------------------------------------------

    @property
    def is_lattice(self) -> bool:
        return bool(len(self) > 0 and (self.join_table >= 0).all() and (self.meet_table >= 0).all())

    def missing_pair(self):
        """First pair (labels, kind) lacking a join or meet, or None."""
        n = len(self)
        for i in range(n):
            for j in range(i + 1, n):
                if self.join_table[i, j] < 0:
                    return (self.elements[i], self.elements[j]), "join"
                if self.meet_table[i, j] < 0:
                    return (self.elements[i], self.elements[j]), "meet"
        return None

    @property
    def bottom_index(self) -> int:
        b = self._least(np.ones(len(self), dtype=bool))
        if b < 0:
            raise NotALattice((None, None), "bottom")
        return b

    @property
    def top_index(self) -> int:
        t = self._greatest(np.ones(len(self), dtype=bool))
        if t < 0:
            raise NotALattice((None, None), "top")
        return t

    @property
    def bottom(self):
        return self.elements[self.bottom_index]

    @property
    def top(self):
        return self.elements[self.top_index]

    def leq_labels(self, x, y) -> bool:
        return bool(self.leq[self._idx(x), self._idx(y)])

    def compare(self, x, y) -> OrderRel:
        i, j = self._idx(x), self._idx(y)
        if i == j:
            return OrderRel.EQUAL
        if self.leq[i, j]:
            return OrderRel.LESS
        if self.leq[j, i]:
            return OrderRel.GREATER
        return OrderRel.INCOMPARABLE

    def join(self, x, y):
        k = self.join_table[self._idx(x), self._idx(y)]
        if k < 0:
            raise NotALattice((x, y), "join")
        return self.elements[k]

    def meet(self, x, y):
        k = self.meet_table[self._idx(x), self._idx(y)]
        if k < 0:
            raise NotALattice((x, y), "meet")
        return self.elements[k]

    # index-level helpers used by the finite engine
    def sup_indices(self, idx: Iterable[int]) -> int:
        acc = self.bottom_index
        for i in idx:
            acc = int(self.join_table[acc, i])
        return acc

    def inf_indices(self, idx: Iterable[int]) -> int:
        acc = self.top_index
        for i in idx:
            acc = int(self.meet_table[acc, i])
        return acc


def build_finite_lattice(elements, covers) -> FiniteLattice:
    """Build and validate a finite lattice from its Hasse diagram.

    Raises CycleDetected when the covers are cyclic and NotALattice naming the
    first pair without a join or meet.
    """
    lat = FiniteLattice(elements, covers)
    if len(lat) == 0:
        raise NotALattice((None, None), "bottom")
    missing = lat.missing_pair()
    if missing is not None:
        raise NotALattice(*missing)
    return lat


def sup_subset(lat: FiniteLattice, subset) -> Hashable:
    """Least upper bound of ``subset``; the empty set gives the bottom."""
    return lat.elements[lat.sup_indices(lat._idx(e) for e in subset)]


def inf_subset(lat: FiniteLattice, subset) -> Hashable:
    """Greatest lower bound of ``subset``; the empty set gives the top."""
    return lat.elements[lat.inf_indices(lat._idx(e) for e in subset)]


def is_chain(lat: FiniteLattice, subset) -> bool:
    idx = [lat._idx(e) for e in subset]
    return all(lat.leq[i, j] or lat.leq[j, i] for i, j in itertools.combinations(idx, 2))


def is_convex(lat: FiniteLattice, subset) -> bool:
    """True iff every element between two members of ``subset`` is a member."""
    idx = {lat._idx(e) for e in subset}
    for i in idx:
        for j in idx:
            if not lat.leq[i, j]:
                continue
            between = np.flatnonzero(lat.leq[i] & lat.leq[:, j])
            if any(int(z) not in idx for z in between):
                return False
    return True


# ---------------------------------------------------------------------------
# a small catalog and the text format


def chain(n: int) -> FiniteLattice:
    return build_finite_lattice(list(range(n)), [(i, i + 1) for i in range(n - 1)])


def diamond() -> FiniteLattice:
    return build_finite_lattice("abcd", [("a", "b"), ("a", "c"), ("b", "d"), ("c", "d")])


def pentagon() -> FiniteLattice:
    """N5: 0 < a < b < 1 and 0 < c < 1 with c incomparable to a, b."""
    return build_finite_lattice(
        ["0", "a", "b", "c", "1"], [("0", "a"), ("a", "b"), ("b", "1"), ("0", "c"), ("c", "1")]
    )


def m3() -> FiniteLattice:
    return build_finite_lattice(
        ["0", "a", "b", "c", "1"],
        [("0", "a"), ("0", "b"), ("0", "c"), ("a", "1"), ("b", "1"), ("c", "1")],
    )


def small_lattice_catalog() -> dict:
    """Every lattice the exhaustive suites run over, keyed by name."""
    cat = {f"chain{n}": chain(n) for n in range(2, 6)}
    cat["diamond"] = diamond()
    cat["pentagon"] = pentagon()
    cat["M3"] = m3()
    return cat


def parse_lattice_text(text: str) -> FiniteLattice:
    """Parse the lattice description format.

    One ``elements: a b c`` line followed by ``cover: lo hi`` lines; ``#``
    starts a comment.
    """
    elements = None
    covers = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, rest = line.partition(":")
        key = key.strip().lower()
        if not sep:
            raise ValueError(f"line {lineno}: expected 'key: values'")
        words = rest.split()
        if key == "elements":
            if elements is not None:
                raise ValueError(f"line {lineno}: duplicate elements line")
            elements = words
        elif key == "cover":
            if elements is None:
                raise ValueError(f"line {lineno}: cover before elements line")
            if len(words) != 2:
                raise ValueError(f"line {lineno}: cover takes exactly two labels")
            covers.append(tuple(words))
        else:
            raise ValueError(f"line {lineno}: unknown key {key!r}")
    if elements is None:
        raise ValueError("missing elements line")
    return build_finite_lattice(elements, covers)


def read_lattice_file(path) -> FiniteLattice:
    with open(path) as fh:
        return parse_lattice_text(fh.read())


def format_lattice_text(lat: FiniteLattice) -> str:
    lines = ["elements: " + " ".join(str(e) for e in lat.elements)]
    lines += [f"cover: {lo} {hi}" for lo, hi in lat.covers]
    return "\n".join(lines) + "\n"
