import itertools
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from latiter.config import build_F, builtin_examples, sample_F
from latiter.errors import (
    GridMismatch,
    MaxIterExceeded,
    MonotoneAscentViolated,
    NotASolution,
    NotMonotone,
    RangeEscape,
    RegimeViolation,
)
from latiter.expr import evaluate, parse_expr
from latiter.lattice import BoxLattice
from latiter.maps import (
    BoxGrid,
    GridEndo,
    GridMap,
    bottom_map,
    enumerate_grid_endos,
    max_node_distance,
    pointwise_inf,
    pointwise_leq,
    pointwise_sup,
)
from latiter.solver import (
    ROUNDING_GUARD,
    Coefficients,
    KleeneRun,
    _guard,
    _kleene,
    apply_T,
    build_G,
    check_uniqueness_conditions,
    compare_solutions,
    residual,
    solve,
    solve_max,
    solve_min,
    solve_relaxed,
    validate_coefficients,
)

EX1, EX2, EX3, FSPACE = builtin_examples()

# f_*(1) for the cubic example at 4097 nodes, tol 1e-10 (high-resolution self-oracle;
# the sequence 257, 513, 1025, 2049, 4097 nodes settles to ~5e-9)
EX2_FMIN_AT_ONE = 0.45565942223298


def manufactured(f, c):
    """F := sum lambda_k f^k at the nodes."""
    return f.with_data(sum(l * p.data for l, p in zip(c.lambdas, f.iterates(c.m))))


# --- coefficients -------------------------------------------------------------


def test_alpha_examples():
    a = validate_coefficients(Coefficients((0.8, -0.1)))
    assert a.alpha == pytest.approx(0.7, abs=1e-15)
    assert a.alphas == pytest.approx((0.2, 0.1), abs=1e-15)
    a = validate_coefficients(Coefficients((0.75, -0.2)))
    assert a.alpha == pytest.approx(0.55, abs=1e-15)
    assert a.alphas == pytest.approx((0.25, 0.2), abs=1e-15)
    a = validate_coefficients(Coefficients((1.0,)))
    assert a.alpha == 1.0 and a.alphas == (0.0,)


@pytest.mark.parametrize(
    "lambdas, condition",
    [((0.5, 0.1), "lambda_2 > 0"), ((1.2, -0.1), "lambda_1 > 1"), ((0.1, -0.2), "lambda <= 0")],
)
def test_regime_violations(lambdas, condition):
    with pytest.raises(RegimeViolation) as err:
        validate_coefficients(Coefficients(lambdas))
    assert err.value.condition == condition


def test_all_violations_listed():
    c = Coefficients((1.5, 0.2, -3.0, 0.1))
    assert c.existence_violations() == ["lambda <= 0", "lambda_1 > 1", "lambda_2 > 0", "lambda_4 > 0"]


def test_regime_classification():
    assert not check_uniqueness_conditions(Coefficients((0.8, -0.1))).uniqueness
    assert check_uniqueness_conditions(Coefficients((1.0, 0.5))).uniqueness
    both = check_uniqueness_conditions(Coefficients((0.7,)))
    assert both.existence and both.uniqueness


# --- G and T ------------------------------------------------------------------


def test_build_G_accepts_examples():
    F1 = build_F(EX1)
    G1 = build_G(F1, EX1.coeffs)
    assert G1.data.max(axis=0) == pytest.approx([1 / 1.4, 2 / 2.1], abs=1e-15)
    G3 = build_G(build_F(EX3), EX3.coeffs)
    assert G3.data.max() == pytest.approx(6 / 17, abs=1e-15)


def test_build_G_range_escape():
    grid = BoxGrid.unit(1, 9)
    top = GridMap(grid, np.ones(9))
    with pytest.raises(RangeEscape):
        build_G(top, Coefficients((0.5,)))


def test_build_G_rejects_negative_floor():
    # inf F / lambda must also stay in the box
    grid = BoxGrid(BoxLattice([-1.0], [1.0]), 5)
    F = GridMap(grid, [-0.6, -0.5, 0.0, 0.1, 0.2])
    with pytest.raises(RangeEscape):
        build_G(F, Coefficients((0.5,)))


def test_T_at_origin_for_example_one():
    F = build_F(EX1)
    a = validate_coefficients(EX1.coeffs)
    Tf = apply_T(bottom_map(F.grid), a, build_G(F, EX1.coeffs))
    assert Tf.eval([0.0, 0.0]).tolist() == [0.0, 0.0]


def test_T_of_bottom_for_cubic_example():
    F = build_F(EX2)
    a = validate_coefficients(EX2.coeffs)
    Tf = apply_T(bottom_map(F.grid), a, build_G(F, EX2.coeffs))
    assert Tf.eval([1.0])[0] == pytest.approx(1 / 3, abs=1e-15)


def test_T_rejects_non_monotone_input():
    F = build_F(EX2)
    a = validate_coefficients(EX2.coeffs)
    f = GridMap(F.grid, 1 - F.grid.nodes())
    with pytest.raises(NotMonotone):
        apply_T(f, a, build_G(F, EX2.coeffs))


def test_T_grid_mismatch():
    F = build_F(EX2)
    a = validate_coefficients(EX2.coeffs)
    with pytest.raises(GridMismatch):
        apply_T(bottom_map(BoxGrid.unit(1, 9)), a, build_G(F, EX2.coeffs))


def test_residual_of_bottom_map():
    F = build_F(EX1)
    r = residual(bottom_map(F.grid), F, EX1.coeffs)
    assert r.tolist() == pytest.approx([0.5, 2 / 3], abs=1e-15)
    assert r.max() == pytest.approx(2 / 3, abs=1e-15)


def test_residual_of_manufactured_solution():
    grid = BoxGrid(BoxLattice([0.0], [4.0]), 5)
    f = GridEndo(grid, [0, 1, 1, 3, 4]).to_gridmap()
    c = Coefficients((0.75, -0.25))
    assert residual(f, manufactured(f, c), c).max() <= 1e-12
    smooth = GridMap.from_function(BoxGrid.unit(1, 257), lambda x: x**2 / 2)
    x = smooth.grid.nodes()
    F = smooth.with_data(0.75 * x**2 / 2 - 0.25 * x**4 / 8)
    assert residual(smooth, F, c).max() <= 1e-5


# --- Kleene solver ----------------------------------------------------------------


def test_cubic_example_minimal_solution():
    F = build_F(EX2)
    f = solve_min(F, EX2.coeffs)
    assert f.eval([0.0])[0] == 0.0
    assert abs(f.eval([1.0])[0] - EX2_FMIN_AT_ONE) <= 1e-4
    assert residual(f, F, EX2.coeffs).max() <= 1e-6


def test_cubic_example_oracle_is_reproducible():
    cfg = EX2.with_overrides(resolution=4097)
    f = solve_min(build_F(cfg), cfg.coeffs, tol=1e-10)
    assert f.eval([1.0])[0] == pytest.approx(EX2_FMIN_AT_ONE, abs=1e-9)


def test_example_one_origin_fixed():
    f = solve_min(build_F(EX1), EX1.coeffs)
    assert f.eval([0.0, 0.0]).tolist() == [0.0, 0.0]


def test_linear_case_returns_F():
    grid = BoxGrid.unit(1, 33)
    F = GridMap.from_function(grid, lambda x: x**2)
    rep = solve(F, Coefficients((1.0,)))
    assert max_node_distance(rep.f_star_min, F) <= 1e-9
    assert max_node_distance(rep.f_star_max, F) <= 1e-9


def test_max_iter_exceeded_carries_best():
    F = build_F(EX2)
    with pytest.raises(MaxIterExceeded) as err:
        solve_min(F, EX2.coeffs, max_iter=2)
    assert err.value.diagnostics["iterations"] == 2
    assert err.value.best.check_monotone()


def test_guard_repairs_noise_and_rejects_real_breaks():
    grid = BoxGrid.unit(1, 5)
    old = GridMap(grid, [0.0, 0.1, 0.1, 0.3, 0.4])
    run = KleeneRun(f=old, iterations=0, last_change=math.inf, residual=np.zeros(1))
    noisy = GridMap(grid, [0.0, 0.1 + 1e-15, 0.1, 0.3, 0.4])
    fixed = _guard(noisy, old, np.zeros(1), np.ones(1), True, run)
    assert fixed.check_monotone() and pointwise_leq(old, fixed)
    assert run.repairs == 1 and run.max_repair <= ROUNDING_GUARD
    broken = GridMap(grid, [0.0, 0.5, 0.1, 0.3, 0.4])
    with pytest.raises(MonotoneAscentViolated):
        _guard(broken, old, np.zeros(1), np.ones(1), True, run)


def test_report_fields():
    rep = solve(build_F(EX2), EX2.coeffs, label="cubic")
    assert rep.passed
    text = rep.comparable_text()
    assert "label = cubic" in text and "status = pass" in text
    assert "wall_time" not in text and "wall_time" in rep.diagnostics_text()
    assert rep.comparable_text() == solve(build_F(EX2), EX2.coeffs, label="cubic").comparable_text()


# --- properties of T --------------------------------------------------------------


@st.composite
def ordered_pair_instance(draw):
    """Random existence-regime data with two monotone maps f ⊴ g on a small grid."""
    dim = draw(st.integers(1, 2))
    rng = np.random.default_rng(draw(st.integers(0, 2**32 - 1)))
    grid = BoxGrid.unit(dim, int(rng.integers(2, 7)))
    l1 = rng.uniform(0.1, 1.0)
    rest = -rng.uniform(0, 0.5, size=int(rng.integers(0, 3))) * l1
    if l1 + rest.sum() <= 0.05:
        rest = rest * 0
    c = Coefficients((l1, *rest))
    lam = c.lambda_sum

    def mono(scale):
        shape = grid.resolution
        cols = []
        for _ in range(dim):
            a = rng.random(shape)
            for ax in range(dim):
                a = np.cumsum(a, axis=ax)
            cols.append((a / a.max() * scale).reshape(-1))
        return np.stack(cols, axis=1)

    F = GridMap(grid, mono(lam * rng.uniform(0.1, 1.0)))
    f = GridMap(grid, mono(rng.uniform(0, 1)))
    g = GridMap(grid, np.minimum(np.maximum(f.data, mono(1.0)), 1.0))
    return F, c, f, g


@given(ordered_pair_instance())
def test_T_is_order_preserving(case):
    F, c, f, g = case
    a = validate_coefficients(c)
    G = build_G(F, c)
    assert pointwise_leq(f, g)
    Tf, Tg = apply_T(f, a, G), apply_T(g, a, G)
    assert pointwise_leq(Tf, Tg)
    assert Tf.check_monotone() and Tg.check_monotone()


@given(ordered_pair_instance())
def test_T_stays_in_box(case):
    F, c, f, _ = case
    Tf = apply_T(f, validate_coefficients(c), build_G(F, c))
    assert np.all(Tf.data >= 0.0) and np.all(Tf.data <= 1.0)


@given(ordered_pair_instance())
def test_sandwich_on_random_solves(case):
    F, c, _, _ = case
    rep = solve(F, c, max_iter=20_000)
    assert rep.comparable and pointwise_leq(rep.f_star_min, rep.f_star_max)
    assert max(rep.residual_min.max(), rep.residual_max.max()) <= 1e-6


def test_kleene_ascent_and_descent_are_monotone():
    F = build_F(EX1)
    c = EX1.coeffs
    a = validate_coefficients(c)
    G = build_G(F, c)
    up, down = bottom_map(F.grid), type(F).top(F.grid)
    for _ in range(25):
        nup, ndown = apply_T(up, a, G), apply_T(down, a, G)
        assert np.all(up.data <= nup.data + ROUNDING_GUARD)
        assert np.all(ndown.data <= down.data + ROUNDING_GUARD)
        assert pointwise_leq(nup, ndown)
        up, down = nup, ndown
    for start in ("bottom", "top"):
        run = _kleene(F, c, start, 1e-9, 1e-6, 10_000)
        assert run.max_repair <= ROUNDING_GUARD


# --- grid refinement ----------------------------------------------------------------


def off_node_residual(cfg, f, pts):
    fx = f.eval(pts)
    lhs = np.zeros_like(fx)
    cur = pts
    for lam in cfg.coefficients:
        cur = f.eval(cur)
        lhs = lhs + lam * cur
    Fx = np.stack([evaluate(parse_expr(e, cfg.dim), pts) for e in cfg.expressions], axis=1)
    return float(np.max(np.abs(lhs - Fx)))


@pytest.mark.parametrize(
    "cfg, resolutions", [(EX1, (17, 33, 65)), (EX2, (129, 257, 513)), (EX3, (257, 513, 1025))]
)
def test_refinement_reduces_off_node_residual(cfg, resolutions):
    pts = np.random.default_rng(11).random((3000, cfg.dim))
    res = []
    for r in resolutions:
        c = cfg.with_overrides(resolution=r)
        f = solve_min(build_F(c), c.coeffs)
        assert residual(f, build_F(c), c.coeffs).max() <= 1e-6
        res.append(off_node_residual(cfg, f, pts))
    assert res[0] >= res[1] >= res[2]


@pytest.mark.parametrize("cfg, coarse, fine", [(EX1, 65, 129), (EX2, 129, 257), (EX3, 129, 257)])
def test_refinement_agrees_at_shared_nodes(cfg, coarse, fine):
    ca, cb = cfg.with_overrides(resolution=coarse), cfg.with_overrides(resolution=fine)
    fa = solve_min(build_F(ca), ca.coeffs)
    fb = solve_min(build_F(cb), cb.coeffs)
    shared = fb.node_array()[(slice(None, None, 2),) * cfg.dim].reshape(-1, cfg.dim)
    assert np.max(np.abs(shared - fa.data)) <= 1e-3


# --- finite check of the extremal-solution formulas ---------------------------------


def _kleene_limit(F, c, start):
    try:
        return (solve_min if start == "bottom" else solve_max)(F, c, 1e-11, 1e-9, 1000), True
    except MaxIterExceeded as err:
        return err.best, False


def test_extremal_formulas_on_integer_grid():
    """On [0,4] with 5 nodes, compare Kleene limits with brute force over node endomorphisms.

    h = inf{e : Te ⊴ e} and H = sup{e : e ⊴ Te} over all monotone integer-valued e.
    Every Kleene iterate from bottom stays below h and from top above H. Real-valued
    maps are a larger lattice than the endomorphisms, so equality is asserted only
    when the two Kleene limits meet (unique fixed point).
    """
    grid = BoxGrid(BoxLattice([0.0], [4.0]), 5)
    c = Coefficients((0.75, -0.25))
    a = validate_coefficients(c)
    endos = [e.to_gridmap() for e in enumerate_grid_endos(grid)]
    assert len(endos) == 126
    checked = unique = 0
    for f0 in endos:
        F = manufactured(f0, c)
        try:
            G = build_G(F, c)
            F.check_monotone().raise_if_failed()
        except (RangeEscape, NotMonotone):
            continue
        images = [apply_T(e, a, G, check=False) for e in endos]
        pre = [e for e, t in zip(endos, images) if pointwise_leq(t, e)]
        post = [e for e, t in zip(endos, images) if pointwise_leq(e, t)]
        h, H = pointwise_inf(pre), pointwise_sup(post)
        assert f0 in pre and f0 in post
        assert pointwise_leq(apply_T(h, a, G), h) and pointwise_leq(H, apply_T(H, a, G))
        lo, lo_ok = _kleene_limit(F, c, "bottom")
        hi, hi_ok = _kleene_limit(F, c, "top")
        assert np.all(lo.data <= h.data + 1e-12)
        assert np.all(H.data <= hi.data + 1e-12)
        checked += 1
        if lo_ok and hi_ok and max_node_distance(lo, hi) <= 1e-9:
            unique += 1
            assert max_node_distance(lo, h) <= 1e-9
            assert max_node_distance(hi, H) <= 1e-9
            assert max_node_distance(lo, f0) <= 1e-9
    assert checked >= 20 and unique >= 5


# --- uniqueness regime ---------------------------------------------------------------


def test_compare_equal():
    f = GridMap.from_function(BoxGrid.unit(1, 9), lambda x: x / 2)
    c = Coefficients((1.0,))
    assert compare_solutions(f, f, f, c, tol=1e-12).verdict == "equal"


def test_compare_outside_uniqueness_regime_is_silent():
    grid = BoxGrid.unit(1, 9)
    f = GridMap.from_function(grid, lambda x: x / 2)
    g = GridMap.from_function(grid, lambda x: x / 4)
    c = Coefficients((0.75, -0.25))
    v = compare_solutions(f, g, f, c, tol=1e-12, tol_res=1.0)
    assert v.verdict == "theorem silent"


def test_compare_rejects_non_solutions():
    grid = BoxGrid.unit(1, 9)
    f = GridMap.from_function(grid, lambda x: x / 2)
    with pytest.raises(NotASolution):
        compare_solutions(f, bottom_map(grid), f, Coefficients((1.0,)), tol=1e-9)


def test_incomparable_solutions_on_square_grid():
    # two exact node solutions of f/2 + f∘f/2 = F on a 3x3 grid of [0,1]^2
    grid = BoxGrid.unit(2, 3)
    nodes = grid.nodes()
    f = GridMap(grid, nodes[[0, 0, 0, 0, 0, 3, 0, 1, 5]])
    g = GridMap(grid, nodes[[0, 0, 0, 0, 0, 3, 0, 1, 7]])
    c = Coefficients((0.5, 0.5))
    F = manufactured(f, c)
    assert residual(g, F, c).max() == 0.0
    assert not pointwise_leq(f, g) and not pointwise_leq(g, f)
    v = compare_solutions(f, g, F, c, tol=1e-12)
    assert v.verdict == "theorem silent" and v.distance == 0.5


def test_uniqueness_clauses_never_contradicted_on_chain_grid():
    # every pair of distinct exact node solutions on a 6-node chain, several coefficient vectors
    grid = BoxGrid.unit(1, 6)
    endos = [e.to_gridmap() for e in enumerate_grid_endos(grid)]
    for lam in [(0.5, 0.5), (0.5, 0.25, 0.25), (0.9, 0.1), (0.25, 0.75)]:
        c = Coefficients(lam)
        by_F = {}
        for e in endos:
            by_F.setdefault(manufactured(e, c).data.tobytes(), []).append(e)
        for group in by_F.values():
            for f, g in itertools.combinations(group, 2):
                v = compare_solutions(f, g, manufactured(f, c), c, tol=1e-12)
                assert v.verdict != "inconsistent", (lam, f.data.ravel(), g.data.ravel(), v)


def test_solve_relaxed_requires_positive_lambda_1():
    F = GridMap(BoxGrid.unit(1, 5), np.zeros(5))
    with pytest.raises(RegimeViolation):
        solve_relaxed(F, Coefficients((0.0, 0.5)))


def test_solve_relaxed_recovers_manufactured_solution():
    grid = BoxGrid.unit(1, 65)
    f = GridMap.from_function(grid, lambda x: 0.2 + 0.6 * x**2)
    c = Coefficients((0.8, 0.2))
    F = manufactured(f, c)
    g = solve_relaxed(F, c)
    assert max_node_distance(f, g) <= 1e-10
    assert compare_solutions(f, g, F, c, tol=1e-8).verdict == "equal"
