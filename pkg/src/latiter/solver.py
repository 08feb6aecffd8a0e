"""
Solve  λ1 f + λ2 f^2 + ... + λm f^m = F  for order-preserving f on a box.

Under the existence regime (λ = Σλk > 0, λ1 ≤ 1, λk ≤ 0 for k ≥ 2) the
equation is equivalent to the fixed-point problem f = T f with

    T f = α1 f + α2 f^2 + ... + αm f^m + α G,   G = F / λ,
    α = λ,  α1 = 1 - λ1,  αk = -λk,

and T is an order-preserving self-map of the complete lattice of monotone
self-maps of the box. ``solve_min`` / ``solve_max`` run the iteration
f ← T f from the constant bottom / top map; the ascent (descent) is
monotone and every iterate is kept monotone and inside the box.

Acceptance is residual-based: ``residual`` measures the defect of the
equation at the grid nodes, with compositions evaluated by interpolation.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    GridMismatch,
    MaxIterExceeded,
    MonotoneAscentViolated,
    NotASolution,
    RangeEscape,
    RegimeViolation,
)
from .maps import MonotoneCheck, max_node_distance, pointwise_leq

#: floating-point noise the iteration is allowed to repair
ROUNDING_GUARD = 1e-12


@dataclass(frozen=True)
class Coefficients:
    """λ1..λm of the equation; ``lambda_sum`` is λ = Σλk."""

    lambdas: tuple

    def __post_init__(self):
        lam = tuple(float(v) for v in self.lambdas)
        if not lam:
            raise ValueError("need at least one coefficient")
        if not all(math.isfinite(v) for v in lam):
            raise ValueError("coefficients must be finite")
        object.__setattr__(self, "lambdas", lam)

    @property
    def m(self) -> int:
        return len(self.lambdas)

    @property
    def lambda_sum(self) -> float:
        return math.fsum(self.lambdas)

    def existence_violations(self) -> list:
        out = []
        if not self.lambda_sum > 0:
            out.append("lambda <= 0")
        if self.lambdas[0] > 1:
            out.append("lambda_1 > 1")
        out += [f"lambda_{k} > 0" for k, v in enumerate(self.lambdas[1:], 2) if v > 0]
        return out

    @property
    def existence_regime(self) -> bool:
        return not self.existence_violations()

    @property
    def uniqueness_regime(self) -> bool:
        return self.lambdas[0] > 0 and all(v >= 0 for v in self.lambdas[1:])


@dataclass(frozen=True)
class AlphaCoefficients:
    """α = λ and α1 = 1 - λ1, αk = -λk; all nonnegative and summing to one."""

    alpha: float
    alphas: tuple

    @property
    def identity_error(self) -> float:
        return abs(math.fsum(self.alphas) + self.alpha - 1.0)


def validate_coefficients(c: Coefficients) -> AlphaCoefficients:
    """Derive the α's, raising RegimeViolation outside the existence regime."""
    bad = c.existence_violations()
    if bad:
        err = RegimeViolation(bad[0])
        err.violations = bad
        raise err
    alphas = (1.0 - c.lambdas[0],) + tuple(-v for v in c.lambdas[1:])
    return AlphaCoefficients(alpha=c.lambda_sum, alphas=alphas)


def build_G(F, c: Coefficients):
    """G = F / λ, checked to stay inside the box."""
    validate_coefficients(c)
    lam = c.lambda_sum
    box = F.grid.box
    sup_f = F.data.max(axis=0)
    inf_f = F.data.min(axis=0)
    if not box.contains(sup_f / lam):
        raise RangeEscape(
            "sup F / lambda",
            f"(1/lambda) sup F = {tuple(np.round(sup_f / lam, 12))} is outside the box",
        )
    if not box.contains(inf_f / lam):
        raise RangeEscape(
            "inf F / lambda",
            f"(1/lambda) inf F = {tuple(np.round(inf_f / lam, 12))} is outside the box",
        )
    return F.with_data(F.data / lam)


def _check_pair(f, G):
    if type(f) is not type(G) or f.grid != G.grid:
        raise GridMismatch("f and G must share grid and representation")


def apply_T(f, a: AlphaCoefficients, G, check: bool = True):
    """T f = Σ αk f^k + α G evaluated at the nodes."""
    _check_pair(f, G)
    if check:
        f.check_monotone().raise_if_failed()
        G.check_monotone().raise_if_failed()
    powers = f.iterates(len(a.alphas))
    out = a.alpha * G.data
    for ak, fk in zip(a.alphas, powers):
        if ak != 0.0:
            out = out + ak * fk.data
    return f.with_data(out)


def residual(f, F, c: Coefficients) -> np.ndarray:
    """Per-component sup over nodes of |Σ λk f^k(n) - F(n)|."""
    _check_pair(f, F)
    powers = f.iterates(c.m)
    lhs = sum(lk * fk.data for lk, fk in zip(c.lambdas, powers))
    return np.max(np.abs(lhs - F.data), axis=0)


# ---------------------------------------------------------------------------
# Kleene ascent / descent


@dataclass
class KleeneRun:
    f: object
    iterations: int
    last_change: float
    residual: np.ndarray
    repairs: int = 0
    max_repair: float = 0.0
    changes: list = field(default_factory=list)


def _guard(new, old, box_lo, box_hi, ascending: bool, run: KleeneRun):
    """Repair rounding noise: clip to the box, restore monotonicity and the ascent/descent."""
    clipped = new.with_data(np.clip(new.data, box_lo, box_hi))
    if ascending:
        fixed = np.maximum(clipped.monotone_majorant().data, old.data)
    else:
        fixed = np.minimum(clipped.monotone_minorant().data, old.data)
    worst = float(np.max(np.abs(fixed - new.data)))
    if worst > ROUNDING_GUARD:
        raise MonotoneAscentViolated(
            f"iterate needed a repair of {worst:.3e} (> {ROUNDING_GUARD:g}); "
            "monotone iteration broke down"
        )
    if worst > 0:
        run.repairs += 1
        run.max_repair = max(run.max_repair, worst)
    return new.with_data(fixed)


def _kleene(F, c, start: str, tol: float, tol_res: float, max_iter: int) -> KleeneRun:
    a = validate_coefficients(c)
    F.check_monotone().raise_if_failed()
    G = build_G(F, c)
    cls = type(F)
    f = cls.bottom(F.grid) if start == "bottom" else cls.top(F.grid)
    lo = np.array(F.grid.box.lower)
    hi = np.array(F.grid.box.upper)
    run = KleeneRun(f=f, iterations=0, last_change=math.inf, residual=np.full(F.grid.dim, np.inf))
    for i in range(1, max_iter + 1):
        new = apply_T(f, a, G, check=False)
        new = _guard(new, f, lo, hi, start == "bottom", run)
        change = float(np.max(np.abs(new.data - f.data)))
        run.changes.append(change)
        f = new
        run.f, run.iterations, run.last_change = f, i, change
        if change < tol:
            run.residual = residual(f, F, c)
            if run.residual.max() < tol_res:
                return run
    run.residual = residual(f, F, c)
    raise MaxIterExceeded(
        f,
        {
            "iterations": run.iterations,
            "last_change": run.last_change,
            "residual": float(run.residual.max()),
            "start": start,
        },
    )


def solve_min(F, c: Coefficients, tol=1e-9, tol_res=1e-6, max_iter=10_000):
    """Minimal solution f_*: iterate T from the constant bottom map."""
    return _kleene(F, c, "bottom", tol, tol_res, max_iter).f


def solve_max(F, c: Coefficients, tol=1e-9, tol_res=1e-6, max_iter=10_000):
    """Maximal solution f^*: iterate T from the constant top map."""
    return _kleene(F, c, "top", tol, tol_res, max_iter).f


@dataclass
class SolveReport:
    f_star_min: object
    f_star_max: object
    iterations_min: int
    iterations_max: int
    residual_min: np.ndarray
    residual_max: np.ndarray
    monotone_min: MonotoneCheck
    monotone_max: MonotoneCheck
    comparable: bool
    distance: float
    coefficients: Coefficients
    alpha: AlphaCoefficients
    tol: float
    tol_res: float
    repairs: int = 0
    max_repair: float = 0.0
    wall_time: float = 0.0
    label: str = ""

    @property
    def passed(self) -> bool:
        return (
            float(np.max(self.residual_min)) <= self.tol_res
            and float(np.max(self.residual_max)) <= self.tol_res
            and self.comparable
            and bool(self.monotone_min)
            and bool(self.monotone_max)
        )

    @property
    def contraction_estimate(self) -> float:
        return float(math.fsum(self.alpha.alphas))

    def comparable_text(self) -> str:
        g = self.f_star_min.grid
        lines = [
            "[solve]",
            f"label = {self.label}",
            f"dim = {g.dim}",
            f"resolution = {','.join(map(str, g.resolution))}",
            f"coefficients = {', '.join(f'{v:.17g}' for v in self.coefficients.lambdas)}",
            f"alpha = {self.alpha.alpha:.17g}",
            f"alphas = {', '.join(f'{v:.17g}' for v in self.alpha.alphas)}",
            f"tol = {self.tol:.3e}",
            f"tol_res = {self.tol_res:.3e}",
            f"iterations_min = {self.iterations_min}",
            f"iterations_max = {self.iterations_max}",
            f"residual_min = {float(np.max(self.residual_min)):.6e}",
            f"residual_max = {float(np.max(self.residual_max)):.6e}",
            f"monotone_min = {bool(self.monotone_min)}",
            f"monotone_max = {bool(self.monotone_max)}",
            f"min_below_max = {self.comparable}",
            f"distance_min_max = {self.distance:.6e}",
            f"f_min_at_bottom = {_vec(self.f_star_min.eval(g.box.bottom))}",
            f"f_min_at_top = {_vec(self.f_star_min.eval(g.box.top))}",
            f"f_max_at_bottom = {_vec(self.f_star_max.eval(g.box.bottom))}",
            f"f_max_at_top = {_vec(self.f_star_max.eval(g.box.top))}",
            f"status = {'pass' if self.passed else 'fail'}",
        ]
        return "\n".join(lines) + "\n"

    def diagnostics_text(self) -> str:
        return (
            "[diagnostics]\n"
            f"wall_time_s = {self.wall_time:.4f}\n"
            f"contraction_estimate = {self.contraction_estimate:.6f}\n"
            f"rounding_repairs = {self.repairs}\n"
            f"max_rounding_repair = {self.max_repair:.3e}\n"
        )

    def format(self) -> str:
        return self.comparable_text() + "\n" + self.diagnostics_text()


def _vec(v) -> str:
    return "(" + ", ".join(f"{x:.10f}" for x in np.atleast_1d(v)) + ")"


def solve(F, c: Coefficients, tol=1e-9, tol_res=1e-6, max_iter=10_000, label="") -> SolveReport:
    """Compute both extremal solutions and bundle them with their certificates."""
    t0 = time.perf_counter()
    a = validate_coefficients(c)
    lo = _kleene(F, c, "bottom", tol, tol_res, max_iter)
    hi = _kleene(F, c, "top", tol, tol_res, max_iter)
    return SolveReport(
        f_star_min=lo.f,
        f_star_max=hi.f,
        iterations_min=lo.iterations,
        iterations_max=hi.iterations,
        residual_min=lo.residual,
        residual_max=hi.residual,
        monotone_min=lo.f.check_monotone(),
        monotone_max=hi.f.check_monotone(),
        comparable=pointwise_leq(lo.f, hi.f),
        distance=max_node_distance(lo.f, hi.f),
        coefficients=c,
        alpha=a,
        tol=tol,
        tol_res=tol_res,
        repairs=lo.repairs + hi.repairs,
        max_repair=max(lo.max_repair, hi.max_repair),
        wall_time=time.perf_counter() - t0,
        label=label,
    )


# ---------------------------------------------------------------------------
# uniqueness regime


@dataclass(frozen=True)
class RegimeReport:
    existence: bool
    uniqueness: bool
    note: str


def check_uniqueness_conditions(c: Coefficients) -> RegimeReport:
    ex, un = c.existence_regime, c.uniqueness_regime
    if ex and un:
        note = "both regimes hold (only possible when lambda_2..lambda_m vanish)"
    elif un:
        note = "uniqueness regime only; the Kleene existence solver does not apply"
    elif ex:
        note = "existence regime only; uniqueness clauses are silent"
    else:
        note = "neither regime holds"
    return RegimeReport(existence=ex, uniqueness=un, note=note)


def solve_relaxed(F, c: Coefficients, start="bottom", theta=1.0, tol=1e-12, max_iter=10_000):
    """Damped Picard iteration f ← (1-θ) f + θ (F - Σ_{k≥2} λk f^k) / λ1.

    Used in the uniqueness regime, where T is not order-preserving and the
    Kleene solver is unavailable. No monotonicity is guaranteed; callers
    must check the residual. Iterates are projected onto the box.
    """
    if not c.lambdas[0] > 0:
        raise RegimeViolation("lambda_1 <= 0")
    cls = type(F)
    f = cls.bottom(F.grid) if start == "bottom" else cls.top(F.grid)
    lo = np.array(F.grid.box.lower)
    hi = np.array(F.grid.box.upper)
    change = math.inf
    for i in range(1, max_iter + 1):
        powers = f.iterates(c.m)
        rest = sum((lk * fk.data for lk, fk in zip(c.lambdas[1:], powers[1:])), np.zeros_like(F.data))
        target = (F.data - rest) / c.lambdas[0]
        new = np.clip((1 - theta) * f.data + theta * target, lo, hi)
        change = float(np.max(np.abs(new - f.data)))
        f = f.with_data(new)
        if change < tol:
            return f
    raise MaxIterExceeded(f, {"iterations": max_iter, "last_change": change, "start": start})


@dataclass(frozen=True)
class Verdict:
    verdict: str
    clause: str | None
    distance: float
    detail: str = ""


def compare_solutions(f, g, F, c: Coefficients, tol: float, tol_res: float | None = None) -> Verdict:
    """Apply the uniqueness clauses to two residual-verified solutions.

    ``tol`` bounds the allowed node distance for an "equal" verdict and
    absorbs noise in the order comparisons; ``tol_res`` (default ``tol``)
    bounds the residuals.
    """
    tol_res = tol if tol_res is None else tol_res
    for name, h in (("first", f), ("second", g)):
        r = float(np.max(residual(h, F, c)))
        if r > tol_res:
            raise NotASolution(f"{name} candidate has residual {r:.3e} > {tol_res:.3e}")
    dist = max_node_distance(f, g)
    if dist <= tol:
        return Verdict("equal", None, dist)
    if not c.uniqueness_regime:
        return Verdict("theorem silent", None, dist, "coefficients outside the uniqueness regime")

    def below(p, q):
        return bool(np.all(p.data <= q.data + tol))

    def clause_verdict(clause):
        # the clause forces equality; a gap above tol contradicts it numerically
        return Verdict("inconsistent", clause, dist, "clause applies but the candidates differ")

    if below(f, g) or below(g, f):
        return clause_verdict("i")
    for p, q in ((f, g), (g, f)):
        sub = bool(np.all(p.compose(q).data <= q.compose(p).data + tol))
        strict = bool(np.any(np.all(p.data <= q.data + tol, axis=1) & np.any(q.data - p.data > tol, axis=1)))
        if sub and strict:
            return clause_verdict("ii")
    if f.grid.dim == 1:
        if float(np.max(np.abs(f.compose(g).data - g.compose(f).data))) <= tol:
            return clause_verdict("iii")
        return Verdict("theorem silent", None, dist, "neither comparable nor commuting")
    return Verdict("theorem silent", None, dist, "incomparable; the commuting clause needs a chain")
