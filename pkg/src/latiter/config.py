"""
Solve configurations: TOML loading, F sampling, and the built-in examples.

A config file looks like::

    label = "example-1"
    dim = 2
    resolution = 65            # or one count per axis
    coefficients = [0.8, -0.1]
    box.lower = [0, 0]
    box.upper = [1, 1]
    F.kind = "expression"      # or "samples"
    F.expression = ["x1^2/2", "(x1+x2)/3"]
    # F.samples = "F.csv"      # map CSV, resolved relative to the config file
    tol = 1e-9
    tol_res = 1e-6
    max_iter = 10000
    p_integral = 3             # optional, 1-D only
"""

from __future__ import annotations

import os
from dataclasses import dataclass, replace

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from .errors import ConfigError, GridMismatch, NotMonotone, RangeEscape
from .expr import evaluate, parse_expr, variables
from .lattice import BoxLattice
from .maps import MAX_DENSE_NODES, BoxGrid, DiagonalMap, GridMap, read_map_csv
from .solver import Coefficients


@dataclass(frozen=True)
class SolveConfig:
    dim: int
    lower: tuple
    upper: tuple
    resolution: tuple
    coefficients: tuple
    expressions: tuple | None = None
    samples: str | None = None
    tol: float = 1e-9
    tol_res: float = 1e-6
    max_iter: int = 10_000
    p_integral: float | None = None
    label: str = ""

    @property
    def grid(self) -> BoxGrid:
        return BoxGrid(BoxLattice(self.lower, self.upper), self.resolution)

    @property
    def coeffs(self) -> Coefficients:
        return Coefficients(self.coefficients)

    def with_overrides(self, **kw):
        kw = {k: v for k, v in kw.items() if v is not None}
        if "resolution" in kw:
            kw["resolution"] = _resolution(kw["resolution"], self.dim)
        return replace(self, **kw)


def _resolution(res, dim):
    res = tuple(int(r) for r in np.atleast_1d(res))
    if len(res) == 1:
        res = res * dim
    if len(res) != dim:
        raise ConfigError(f"resolution needs 1 or {dim} entries")
    return res


def _vector(raw, dim, key):
    vals = np.atleast_1d(np.asarray(raw, dtype=float))
    if vals.size == 1:
        vals = np.repeat(vals, dim)
    if vals.size != dim:
        raise ConfigError(f"{key} needs {dim} entries, got {vals.size}")
    return tuple(float(v) for v in vals)


def config_from_dict(d: dict, base_dir: str = ".") -> SolveConfig:
    try:
        dim = int(d["dim"])
        box = d.get("box", {})
        fsec = d.get("F", {})
        kind = fsec.get("kind", "expression")
        exprs = samples = None
        if kind == "expression":
            exprs = fsec["expression"]
            if isinstance(exprs, str):
                exprs = [exprs]
            exprs = tuple(str(e) for e in exprs)
            if len(exprs) != dim:
                raise ConfigError(f"F.expression needs {dim} components, got {len(exprs)}")
        elif kind == "samples":
            samples = os.path.join(base_dir, fsec["samples"])
        else:
            raise ConfigError(f"F.kind must be 'expression' or 'samples', not {kind!r}")
        return SolveConfig(
            dim=dim,
            lower=_vector(box.get("lower", 0.0), dim, "box.lower"),
            upper=_vector(box.get("upper", 1.0), dim, "box.upper"),
            resolution=_resolution(d.get("resolution", 257 if dim == 1 else 65), dim),
            coefficients=tuple(float(v) for v in d["coefficients"]),
            expressions=exprs,
            samples=samples,
            tol=float(d.get("tol", 1e-9)),
            tol_res=float(d.get("tol_res", 1e-6)),
            max_iter=int(d.get("max_iter", 10_000)),
            p_integral=None if d.get("p_integral") is None else float(d["p_integral"]),
            label=str(d.get("label", "")),
        )
    except KeyError as e:
        raise ConfigError(f"missing config key {e.args[0]!r}") from None
    except (TypeError, ValueError) as e:
        if isinstance(e, ConfigError):
            raise
        raise ConfigError(str(e)) from None


def load_config(path) -> SolveConfig:
    try:
        with open(path, "rb") as fh:
            raw = tomllib.load(fh)
    except OSError as e:
        raise ConfigError(f"cannot read config {path}: {e.strerror}") from None
    except tomllib.TOMLDecodeError as e:
        raise ConfigError(f"{path}: {e}") from None
    return config_from_dict(raw, os.path.dirname(os.path.abspath(path)))


def _separable(trees) -> bool:
    return all(variables(t) <= {i} for i, t in enumerate(trees, 1))


def sample_F(exprs, grid: BoxGrid, layout: str = "auto"):
    """Evaluate per-component expressions at the nodes and validate the result.

    Dense grids become a GridMap. A grid too large to store densely is
    accepted only when component i depends on x_i alone, as a DiagonalMap.
    Raises RangeEscape at the first node mapped outside the box and
    NotMonotone with a witness pair.
    """
    trees = [parse_expr(e, grid.dim) if isinstance(e, str) else e for e in exprs]
    if len(trees) != grid.dim:
        raise ConfigError(f"need {grid.dim} component expressions, got {len(trees)}")
    if layout == "auto":
        layout = "dense" if grid.n_nodes <= MAX_DENSE_NODES else "diagonal"
    if layout == "diagonal":
        if not _separable(trees) or len(set(grid.resolution)) != 1:
            raise ConfigError(
                f"grid has {grid.n_nodes} nodes; only separable F (component i uses x_i only) "
                "with equal per-axis resolution can be solved at this size"
            )
        r = grid.resolution[0]
        # row k of a diagonal map is the grid node built from the k-th node of every axis
        pts = np.stack(grid.axes, axis=1)
        data = np.stack([evaluate(t, pts) * np.ones(r) for t in trees], axis=1)
        F = DiagonalMap(grid, data)
        nodes = pts
    else:
        nodes = grid.nodes()
        data = np.stack([evaluate(t, nodes) * np.ones(len(nodes)) for t in trees], axis=1)
        F = GridMap(grid, data)
    lo, hi = np.array(grid.box.lower), np.array(grid.box.upper)
    out = np.flatnonzero(~np.all((F.data >= lo) & (F.data <= hi), axis=1))
    if len(out):
        k = out[0]
        raise RangeEscape(
            tuple(float(v) for v in nodes[k]),
            f"F maps node {tuple(np.round(nodes[k], 12))} to {tuple(np.round(F.data[k], 12))}, outside the box",
        )
    chk = F.check_monotone()
    if not chk:
        raise NotMonotone(chk.witness, f"F is not order-preserving: F{chk.witness[0]} is not below F{chk.witness[1]}")
    return F


def build_F(cfg: SolveConfig):
    if cfg.expressions is not None:
        return sample_F(cfg.expressions, cfg.grid)
    F = read_map_csv(cfg.samples)
    if F.grid != cfg.grid:
        raise GridMismatch(f"samples file grid {F.grid!r} differs from config grid {cfg.grid!r}")
    F.check_monotone().raise_if_failed()
    return F


# ---------------------------------------------------------------------------
# built-in examples

FUNCTION_SPACE_SAMPLES = 33


def _function_space_exprs(n: int) -> tuple:
    # maps [0,1] -> [0,1] sampled at t_i = (i-1)/(n-1); F(phi) = (id + phi)/5 pointwise
    ts = np.linspace(0.0, 1.0, n)
    return tuple(f"({float(t)!r} + x{i})/5" for i, t in enumerate(ts, 1))


def builtin_examples(resolution: int | None = None) -> list:
    """The four worked examples; ``resolution`` overrides every per-axis node count."""
    cfgs = [
        SolveConfig(
            label="example-1",
            dim=2,
            lower=(0.0, 0.0),
            upper=(1.0, 1.0),
            resolution=(65, 65),
            coefficients=(0.8, -0.1),
            expressions=("x1^2/2", "(x1+x2)/3"),
        ),
        SolveConfig(
            label="example-2",
            dim=1,
            lower=(0.0,),
            upper=(1.0,),
            resolution=(257,),
            coefficients=(0.75, -0.2),
            expressions=("x1^3/3",),
        ),
        SolveConfig(
            label="example-3",
            dim=1,
            lower=(0.0,),
            upper=(1.0,),
            resolution=(1025,),
            coefficients=(7 / 8, -1 / 6),
            expressions=("x1^2/4",),
            p_integral=3.0,
        ),
        SolveConfig(
            label="function-space",
            dim=FUNCTION_SPACE_SAMPLES,
            lower=(0.0,) * FUNCTION_SPACE_SAMPLES,
            upper=(1.0,) * FUNCTION_SPACE_SAMPLES,
            resolution=(257,) * FUNCTION_SPACE_SAMPLES,
            coefficients=(0.75, -0.25),
            expressions=_function_space_exprs(FUNCTION_SPACE_SAMPLES),
        ),
    ]
    if resolution is not None:
        cfgs = [c.with_overrides(resolution=resolution, tol_res=1e-4) for c in cfgs]
    return cfgs


def config_to_toml(cfg: SolveConfig) -> str:
    """Serialize a config back to the file format (expression configs only)."""
    def arr(v):
        return "[" + ", ".join(repr(float(x)) for x in v) + "]"

    lines = [
        f'label = "{cfg.label}"',
        f"dim = {cfg.dim}",
        f"resolution = [{', '.join(map(str, cfg.resolution))}]",
        f"coefficients = {arr(cfg.coefficients)}",
        f"tol = {cfg.tol!r}",
        f"tol_res = {cfg.tol_res!r}",
        f"max_iter = {cfg.max_iter}",
    ]
    if cfg.p_integral is not None:
        lines.append(f"p_integral = {cfg.p_integral!r}")
    lines += ["", "[box]", f"lower = {arr(cfg.lower)}", f"upper = {arr(cfg.upper)}", "", "[F]"]
    if cfg.expressions is not None:
        lines.append('kind = "expression"')
        lines.append("expression = [" + ", ".join(f'"{e}"' for e in cfg.expressions) + "]")
    else:
        lines.append('kind = "samples"')
        lines.append(f'samples = "{cfg.samples}"')
    return "\n".join(lines) + "\n"
