"""Order-preserving solutions of polynomial-like iterative equations on lattices."""

from .errors import *  # noqa: F401,F403
from .lattice import (
    BoxLattice,
    FiniteLattice,
    OrderRel,
    build_finite_lattice,
    compare_lex,
    compare_product,
    inf_subset,
    is_chain,
    is_convex,
    read_lattice_file,
    sup_subset,
)
from .maps import (
    BoxGrid,
    DiagonalMap,
    GridEndo,
    GridMap,
    bottom_map,
    check_monotone,
    check_subcommutes,
    const_map,
    p_integral,
    pointwise_inf,
    pointwise_leq,
    pointwise_sup,
    read_map_csv,
    top_map,
    usc_report,
    write_map_csv,
)
from .solver import (
    AlphaCoefficients,
    Coefficients,
    SolveReport,
    apply_T,
    build_G,
    check_uniqueness_conditions,
    compare_solutions,
    residual,
    solve,
    solve_max,
    solve_min,
    validate_coefficients,
)

__version__ = "0.1.0"
