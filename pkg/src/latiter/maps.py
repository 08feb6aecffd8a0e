"""
Order-preserving self-maps of a box lattice.

Three representations share one grid type:

* ``GridMap`` stores real node values and evaluates off-grid by componentwise
  multilinear interpolation. Interpolating monotone node data gives a
  monotone map of the whole box, which is what the solver needs.
* ``DiagonalMap`` is a compressed ``GridMap`` whose component ``i`` depends
  only on coordinate ``i``. It makes high-dimensional boxes with separable
  data (e.g. a function space sampled at n points) tractable.
* ``GridEndo`` sends grid nodes to grid nodes. Everything about it is exact
  integer bookkeeping, so order-theoretic laws can be checked without
  interpolation error.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import DimensionMismatch, GridMismatch, NotMonotone, OutsideBox
from .lattice import BoxLattice

#: dense grids above this many nodes are refused
MAX_DENSE_NODES = 5_000_000


class BoxGrid:
    """Uniform tensor grid on a box; nodes are enumerated in row-major order."""

    def __init__(self, box: BoxLattice, resolution):
        if not isinstance(box, BoxLattice):
            box = BoxLattice(*box)
        res = tuple(int(r) for r in np.atleast_1d(resolution))
        if len(res) == 1 and box.dim > 1:
            res = res * box.dim
        if len(res) != box.dim:
            raise DimensionMismatch(f"resolution has {len(res)} entries for a {box.dim}-d box")
        if any(r < 2 for r in res):
            raise ValueError("every axis needs at least 2 nodes")
        self.box = box
        self.resolution = res
        self.axes = tuple(
            np.linspace(lo, hi, r) for lo, hi, r in zip(box.lower, box.upper, res)
        )
        for ax in self.axes:
            ax.setflags(write=False)

    @classmethod
    def unit(cls, dim, resolution):
        return cls(BoxLattice.unit(dim), resolution)

    @property
    def dim(self) -> int:
        return self.box.dim

    @property
    def n_nodes(self) -> int:
        return math.prod(self.resolution)

    def __eq__(self, other):
        return (
            isinstance(other, BoxGrid)
            and self.box == other.box
            and self.resolution == other.resolution
        )

    def __hash__(self):
        return hash((self.box, self.resolution))

    def __repr__(self):
        return f"BoxGrid(lower={self.box.lower}, upper={self.box.upper}, resolution={self.resolution})"

    def nodes(self) -> np.ndarray:
        """All node coordinates, shape (n_nodes, dim)."""
        if self.n_nodes > MAX_DENSE_NODES:
            raise MemoryError(f"grid has {self.n_nodes} nodes; too many to enumerate")
        mesh = np.meshgrid(*self.axes, indexing="ij")
        return np.stack([m.reshape(-1) for m in mesh], axis=1)

    def multi_indices(self) -> np.ndarray:
        """Integer node coordinates, shape (n_nodes, dim), row-major."""
        mesh = np.meshgrid(*[np.arange(r) for r in self.resolution], indexing="ij")
        return np.stack([m.reshape(-1) for m in mesh], axis=1)

    def flat_index(self, multi) -> np.ndarray:
        return np.ravel_multi_index(tuple(np.asarray(multi).T), self.resolution)

    def locate(self, points: np.ndarray, axis: int):
        """Cell index and in-cell weight of coordinate values along one axis."""
        lo, hi = self.box.lower[axis], self.box.upper[axis]
        r = self.resolution[axis]
        if hi == lo:
            t = np.zeros_like(points)
        else:
            t = (points - lo) * ((r - 1) / (hi - lo))
        cell = np.clip(np.floor(t).astype(np.int64), 0, r - 2)
        w = np.clip(t - cell, 0.0, 1.0)
        return cell, w

    def check_points(self, pts: np.ndarray):
        lo = np.array(self.box.lower)
        hi = np.array(self.box.upper)
        bad = ~np.all((pts >= lo) & (pts <= hi), axis=-1)
        if bad.any():
            p = pts[np.flatnonzero(bad)[0]]
            raise OutsideBox(f"point {tuple(p)} is outside the box")


def _lerp(a, b, w):
    """a + w (b - a), exact at w = 0 and w = 1 and kept between a and b."""
    v = a + w * (b - a)
    v = np.clip(v, np.minimum(a, b), np.maximum(a, b))
    return np.where(w == 1.0, b, v)


# ---------------------------------------------------------------------------


class _NodeMap:
    """Shared machinery for maps stored as node data on a BoxGrid."""

    grid: BoxGrid
    data: np.ndarray

    def with_data(self, data):
        return type(self)(self.grid, data)

    def _same_grid(self, other):
        if type(other) is not type(self) or other.grid != self.grid:
            raise GridMismatch("maps live on different grids or representations")

    def __eq__(self, other):
        return (
            type(other) is type(self)
            and other.grid == self.grid
            and np.array_equal(other.data, self.data)
        )

    __hash__ = None

    def _in_box(self):
        lo = np.array(self.grid.box.lower)
        hi = np.array(self.grid.box.upper)
        return bool(np.all((self.data >= lo) & (self.data <= hi)))

    def compose(self, g):
        """The map node ↦ self(g(node))."""
        self._same_grid(g)
        return self.with_data(self.eval_data(g.data))

    def __matmul__(self, g):
        return self.compose(g)

    def iterate(self, k: int):
        if k < 0:
            raise ValueError("iteration order must be nonnegative")
        out = type(self).identity(self.grid)
        for _ in range(k):
            out = self.compose(out)
        return out

    def iterates(self, m: int) -> list:
        """[f, f^2, ..., f^m] built by f^k = f∘f^(k-1)."""
        out = [self]
        for _ in range(m - 1):
            out.append(self.compose(out[-1]))
        return out

    @classmethod
    def const(cls, grid: BoxGrid, c):
        c = np.asarray(c, dtype=float).reshape(-1)
        if c.size != grid.dim:
            raise DimensionMismatch(f"constant has {c.size} components for a {grid.dim}-d box")
        if not grid.box.contains(c):
            raise OutsideBox(f"constant {tuple(c)} is outside the box")
        return cls._const_data(grid, c)

    @classmethod
    def bottom(cls, grid):
        return cls.const(grid, grid.box.lower)

    @classmethod
    def top(cls, grid):
        return cls.const(grid, grid.box.upper)


class GridMap(_NodeMap):
    """Self-map of a box given by node values and multilinear interpolation.

    ``values`` has shape ``(n_nodes, dim)`` in row-major node order.
    """

    def __init__(self, grid: BoxGrid, values):
        values = np.array(values, dtype=float)
        if values.ndim == 1 and grid.dim == 1:
            values = values[:, None]
        values = values.reshape(grid.n_nodes, grid.dim)
        values.setflags(write=False)
        self.grid = grid
        self.data = values

    @property
    def values(self) -> np.ndarray:
        return self.data

    def __repr__(self):
        return f"GridMap({self.grid!r})"

    @classmethod
    def from_function(cls, grid: BoxGrid, func):
        """Sample a vectorized ``func((N, dim) array) -> (N, dim) array`` at the nodes."""
        nodes = grid.nodes()
        return cls(grid, np.asarray(func(nodes), dtype=float).reshape(nodes.shape))

    @classmethod
    def identity(cls, grid):
        return cls(grid, grid.nodes())

    @classmethod
    def _const_data(cls, grid, c):
        return cls(grid, np.broadcast_to(c, (grid.n_nodes, grid.dim)))

    def node_array(self) -> np.ndarray:
        """Values reshaped to ``(*resolution, dim)``."""
        return self.data.reshape(*self.grid.resolution, self.grid.dim)

    def eval(self, x) -> np.ndarray:
        """Interpolated value at one point (shape (dim,)) or many (shape (M, dim))."""
        pts = np.asarray(x, dtype=float)
        single = pts.ndim <= 1
        pts = pts.reshape(-1, self.grid.dim)
        self.grid.check_points(pts)
        out = self.eval_data(pts)
        return out[0] if single else out

    def eval_data(self, pts: np.ndarray) -> np.ndarray:
        grid = self.grid
        n = grid.dim
        cells, weights = zip(*(grid.locate(pts[:, a], a) for a in range(n)))
        strides = np.array([math.prod(grid.resolution[a + 1 :]) for a in range(n)])
        base = sum(c * s for c, s in zip(cells, strides))
        # corner values indexed by bit pattern; bit a set means the upper node on axis a
        corners = {}
        for bits in itertools.product((0, 1), repeat=n):
            offset = int(sum(b * s for b, s in zip(bits, strides)))
            corners[bits] = self.data[base + offset]
        for a in range(n - 1, -1, -1):
            w = weights[a][:, None]
            reduced = {}
            for bits in itertools.product((0, 1), repeat=a):
                reduced[bits] = _lerp(corners[bits + (0,)], corners[bits + (1,)], w)
            corners = reduced
        return corners[()]

    def check_monotone(self) -> "MonotoneCheck":
        arr = self.node_array()
        for a in range(self.grid.dim):
            diff = np.diff(arr, axis=a)
            bad = np.argwhere(diff < 0)
            if len(bad):
                idx = tuple(int(i) for i in bad[0][:-1])
                upper = list(idx)
                upper[a] += 1
                lo = tuple(float(self.grid.axes[k][i]) for k, i in enumerate(idx))
                hi = tuple(float(self.grid.axes[k][i]) for k, i in enumerate(upper))
                return MonotoneCheck(False, (lo, hi))
        return MonotoneCheck(True)

    def monotone_majorant(self):
        """Smallest monotone map above the node data (running max along every axis)."""
        arr = np.array(self.node_array())
        for a in range(self.grid.dim):
            arr = np.maximum.accumulate(arr, axis=a)
        return self.with_data(arr.reshape(self.data.shape))

    def monotone_minorant(self):
        """Greatest monotone map below the node data (running min from the top)."""
        arr = np.array(self.node_array())
        for a in range(self.grid.dim):
            arr = np.flip(np.minimum.accumulate(np.flip(arr, a), axis=a), a)
        return self.with_data(arr.reshape(self.data.shape))


class DiagonalMap(_NodeMap):
    """Self-map whose component ``i`` depends only on coordinate ``i``.

    All axes share one node count ``r``; ``data[:, i]`` holds component ``i``
    at the ``r`` nodes of axis ``i``. Row ``k`` of ``data`` is therefore the
    exact image of the grid node made of the k-th node of every axis. The
    multilinear interpolant of the equivalent dense GridMap is the 1-D linear
    interpolant applied per component, so both representations agree
    everywhere.
    """

    def __init__(self, grid: BoxGrid, data):
        if len(set(grid.resolution)) != 1:
            raise ValueError("DiagonalMap needs the same node count on every axis")
        data = np.array(data, dtype=float).reshape(grid.resolution[0], grid.dim)
        data.setflags(write=False)
        self.grid = grid
        self.data = data

    def __repr__(self):
        return f"DiagonalMap({self.grid!r})"

    @classmethod
    def from_components(cls, grid: BoxGrid, funcs: Sequence):
        cols = [np.asarray(f(ax), dtype=float) * np.ones_like(ax) for f, ax in zip(funcs, grid.axes)]
        return cls(grid, np.stack(cols, axis=1))

    @classmethod
    def identity(cls, grid):
        return cls(grid, np.stack(grid.axes, axis=1))

    @classmethod
    def _const_data(cls, grid, c):
        return cls(grid, np.broadcast_to(c, (grid.resolution[0], grid.dim)))

    def eval(self, x) -> np.ndarray:
        pts = np.asarray(x, dtype=float)
        single = pts.ndim <= 1
        pts = pts.reshape(-1, self.grid.dim)
        self.grid.check_points(pts)
        out = self.eval_data(pts)
        return out[0] if single else out

    def eval_data(self, pts: np.ndarray) -> np.ndarray:
        out = np.empty_like(pts, dtype=float)
        for a in range(self.grid.dim):
            cell, w = self.grid.locate(pts[:, a], a)
            col = self.data[:, a]
            out[:, a] = _lerp(col[cell], col[cell + 1], w)
        return out

    def to_gridmap(self) -> GridMap:
        grid = self.grid
        if grid.n_nodes > MAX_DENSE_NODES:
            raise MemoryError("dense form too large")
        idx = grid.multi_indices()
        vals = np.stack([self.data[idx[:, a], a] for a in range(grid.dim)], axis=1)
        return GridMap(grid, vals)

    def check_monotone(self) -> "MonotoneCheck":
        diff = np.diff(self.data, axis=0)
        bad = np.argwhere(diff < 0)
        if len(bad):
            k, a = map(int, bad[0])
            ax = self.grid.axes[a]
            # witness: two nodes differing only on axis a, other coordinates at their lower corner
            lo = [float(v) for v in self.grid.box.lower]
            hi = list(lo)
            lo[a], hi[a] = float(ax[k]), float(ax[k + 1])
            return MonotoneCheck(False, (tuple(lo), tuple(hi)))
        return MonotoneCheck(True)

    def monotone_majorant(self):
        return self.with_data(np.maximum.accumulate(self.data, axis=0))

    def monotone_minorant(self):
        return self.with_data(np.flip(np.minimum.accumulate(np.flip(self.data, 0), axis=0), 0))


@dataclass(frozen=True)
class MonotoneCheck:
    """Outcome of a monotonicity check; truthy iff monotone."""

    ok: bool
    witness: tuple | None = None

    def __bool__(self):
        return self.ok

    def raise_if_failed(self):
        if not self.ok:
            raise NotMonotone(self.witness)


# ---------------------------------------------------------------------------
# exact node-to-node maps


class GridEndo:
    """Endomorphism of the finite grid-node lattice: node index ↦ node index."""

    def __init__(self, grid: BoxGrid, images):
        images = np.array(images, dtype=np.int64).reshape(-1)
        if images.size != grid.n_nodes:
            raise DimensionMismatch(f"need {grid.n_nodes} images, got {images.size}")
        if images.min() < 0 or images.max() >= grid.n_nodes:
            raise ValueError("image index out of range")
        images.setflags(write=False)
        self.grid = grid
        self.images = images

    def __repr__(self):
        return f"GridEndo({self.images.tolist()})"

    def __eq__(self, other):
        return (
            isinstance(other, GridEndo)
            and other.grid == self.grid
            and np.array_equal(other.images, self.images)
        )

    def __hash__(self):
        return hash((self.grid, self.images.tobytes()))

    def _same_grid(self, other):
        if not isinstance(other, GridEndo) or other.grid != self.grid:
            raise GridMismatch("endomorphisms live on different grids")

    @classmethod
    def identity(cls, grid):
        return cls(grid, np.arange(grid.n_nodes))

    @classmethod
    def const(cls, grid, node: int):
        return cls(grid, np.full(grid.n_nodes, node))

    def compose(self, g: "GridEndo") -> "GridEndo":
        self._same_grid(g)
        return GridEndo(self.grid, self.images[g.images])

    __matmul__ = compose

    def iterate(self, k: int) -> "GridEndo":
        out = GridEndo.identity(self.grid)
        for _ in range(k):
            out = self.compose(out)
        return out

    def _multi(self):
        return self.grid.multi_indices()

    def check_monotone(self) -> MonotoneCheck:
        multi = self._multi()
        img = multi[self.images]
        shape = self.grid.resolution
        arr = img.reshape(*shape, self.grid.dim)
        for a in range(self.grid.dim):
            bad = np.argwhere(np.diff(arr, axis=a) < 0)
            if len(bad):
                idx = tuple(int(i) for i in bad[0][:-1])
                upper = list(idx)
                upper[a] += 1
                return MonotoneCheck(
                    False,
                    (int(self.grid.flat_index([idx])[0]), int(self.grid.flat_index([upper])[0])),
                )
        return MonotoneCheck(True)

    def node_leq(self, i, j) -> np.ndarray:
        multi = self._multi()
        return np.all(multi[i] <= multi[j], axis=-1)

    def leq(self, other: "GridEndo") -> bool:
        """Pointwise order: every image of self lies below the image of other."""
        self._same_grid(other)
        return bool(np.all(self.node_leq(self.images, other.images)))

    def to_gridmap(self) -> GridMap:
        return GridMap(self.grid, self.grid.nodes()[self.images])

    def step_values(self) -> np.ndarray:
        """Image coordinates per node (1-D grids): the heights of the induced step map."""
        return self.grid.nodes()[self.images][:, 0]


def enumerate_grid_endos(grid: BoxGrid, monotone_only=True):
    """Yield every (monotone) endomorphism of a small grid, in lexicographic image order."""
    n = grid.n_nodes
    multi = grid.multi_indices()
    below = [[j for j in range(i) if np.all(multi[j] <= multi[i])] for i in range(n)]
    above = [[j for j in range(i) if np.all(multi[i] <= multi[j])] for i in range(n)]
    le = np.all(multi[:, None, :] <= multi[None, :, :], axis=-1)
    imgs = [0] * n

    def rec(i):
        if i == n:
            yield GridEndo(grid, imgs)
            return
        for v in range(n):
            if monotone_only and (
                any(not le[imgs[j], v] for j in below[i]) or any(not le[v, imgs[j]] for j in above[i])
            ):
                continue
            imgs[i] = v
            yield from rec(i + 1)

    yield from rec(0)


# ---------------------------------------------------------------------------
# pointwise lattice structure


def _check_family(maps):
    for f in maps[1:]:
        maps[0]._same_grid(f)


def pointwise_leq(f, g) -> bool:
    """f ⊴ g: every node value of f lies below the corresponding value of g."""
    if isinstance(f, GridEndo):
        return f.leq(g)
    f._same_grid(g)
    return bool(np.all(f.data <= g.data))


def pointwise_sup(family, grid=None, cls=GridMap):
    """Nodewise componentwise max; the empty family gives the constant bottom map."""
    family = list(family)
    if not family:
        if grid is None:
            raise ValueError("empty family needs an explicit grid")
        return cls.bottom(grid)
    _check_family(family)
    return family[0].with_data(np.max([f.data for f in family], axis=0))


def pointwise_inf(family, grid=None, cls=GridMap):
    """Nodewise componentwise min; the empty family gives the constant top map."""
    family = list(family)
    if not family:
        if grid is None:
            raise ValueError("empty family needs an explicit grid")
        return cls.top(grid)
    _check_family(family)
    return family[0].with_data(np.min([f.data for f in family], axis=0))


def check_monotone(f) -> MonotoneCheck:
    return f.check_monotone()


def check_subcommutes(f, g, tol: float = 0.0) -> bool:
    """True iff (f∘g)(n) ⪯ (g∘f)(n) + tol at every node."""
    if tol < 0:
        raise ValueError("tol must be nonnegative")
    if isinstance(f, GridEndo):
        return f.compose(g).leq(g.compose(f))
    fg = f.compose(g)
    gf = g.compose(f)
    return bool(np.all(fg.data <= gf.data + tol))


def const_map(grid, c, cls=GridMap):
    return cls.const(grid, c)


def bottom_map(grid, cls=GridMap):
    return cls.bottom(grid)


def top_map(grid, cls=GridMap):
    return cls.top(grid)


def max_node_distance(f, g) -> float:
    f._same_grid(g)
    return float(np.max(np.abs(f.data - g.data)))


# ---------------------------------------------------------------------------
# reports


@dataclass(frozen=True)
class USCReport:
    usc: tuple
    monotone: MonotoneCheck
    method: str
    jump_nodes: tuple = field(default=())

    @property
    def all_usc(self) -> bool:
        return all(self.usc)


def usc_report(f) -> USCReport:
    """Upper semi-continuity certificate.

    Interpolated maps are continuous, hence USC in every component. A 1-D
    GridEndo is read as the step map taking value ``image(n_i)`` on
    ``[n_i, n_{i+1})`` (the upper value at each jump); its limsup is checked
    at each of the finitely many jump nodes.
    """
    if isinstance(f, GridEndo):
        return _step_usc_report(f)
    return USCReport(
        usc=(True,) * f.grid.dim,
        monotone=f.check_monotone(),
        method="continuous piecewise-multilinear interpolant",
    )


def _step_usc_report(f: GridEndo) -> USCReport:
    if f.grid.dim != 1:
        raise DimensionMismatch("step-map USC check is defined on 1-D grids")
    v = f.step_values()
    nodes = f.grid.axes[0]
    ok = True
    jumps = []
    for i in range(1, len(v)):
        left, value = v[i - 1], v[i]
        right = v[i] if i < len(v) - 1 else value
        if left != value:
            jumps.append(float(nodes[i]))
        if max(left, right) > value:
            ok = False
    return USCReport(
        usc=(ok,),
        monotone=f.check_monotone(),
        method="step map, upper value at jumps; limsup checked at jump nodes",
        jump_nodes=tuple(jumps),
    )


def p_integral(f, p: float) -> np.ndarray:
    """Composite-trapezoid ∫|f|^p over the interval, per component (1-D grids only)."""
    if p < 1:
        raise ValueError("p must be at least 1")
    if f.grid.dim != 1:
        raise DimensionMismatch("p-integral is defined for maps on an interval")
    x = f.grid.axes[0]
    return np.array([np.trapezoid(np.abs(f.data[:, c]) ** p, x) for c in range(f.data.shape[1])])


# ---------------------------------------------------------------------------
# CSV


def _fmt(v: float) -> str:
    return format(float(v), ".17g")


def write_map_csv(path, f):
    """Write ``# dim=.. res=.. box=..:..`` then one ``node..., image...`` row per node."""
    grid = f.grid
    header = (
        f"# dim={grid.dim} res={','.join(map(str, grid.resolution))} "
        f"box={','.join(map(_fmt, grid.box.lower))}:{','.join(map(_fmt, grid.box.upper))}"
    )
    if isinstance(f, DiagonalMap):
        header += " layout=diagonal"
        nodes = np.stack(grid.axes, axis=1)
    else:
        nodes = grid.nodes()
    with open(path, "w") as fh:
        fh.write(header + "\n")
        for x, y in zip(nodes, f.data):
            fh.write(",".join(_fmt(v) for v in (*x, *y)) + "\n")


def _parse_header(line: str) -> dict:
    if not line.startswith("#"):
        raise ValueError("map CSV must start with a '# dim=...' header")
    fields = {}
    for tok in line[1:].split():
        k, _, v = tok.partition("=")
        fields[k] = v
    for key in ("dim", "res", "box"):
        if key not in fields:
            raise ValueError(f"map CSV header lacks {key}=")
    return fields


def read_map_csv(path):
    """Read a map CSV back into a GridMap (or DiagonalMap for ``layout=diagonal``)."""
    with open(path) as fh:
        header = _parse_header(fh.readline().strip())
        rows = [line for line in fh if line.strip() and not line.startswith("#")]
    dim = int(header["dim"])
    res = [int(r) for r in header["res"].split(",")]
    lo, _, hi = header["box"].partition(":")
    box = BoxLattice([float(v) for v in lo.split(",")], [float(v) for v in hi.split(",")])
    grid = BoxGrid(box, res)
    table = np.array([[float(v) for v in r.split(",")] for r in rows]).reshape(-1, 2 * dim)
    diagonal = header.get("layout") == "diagonal"
    expect = np.stack(grid.axes, axis=1) if diagonal else grid.nodes()
    if table.shape[0] != expect.shape[0]:
        raise GridMismatch(f"expected {expect.shape[0]} rows, found {table.shape[0]}")
    if not np.allclose(table[:, :dim], expect, rtol=0, atol=1e-12 * (1 + np.abs(expect).max())):
        raise GridMismatch("node coordinates in file do not match the header grid")
    cls = DiagonalMap if diagonal else GridMap
    return cls(grid, table[:, dim:])
