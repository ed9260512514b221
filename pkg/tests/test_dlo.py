import itertools
import random
from fractions import Fraction

import pytest

from opdim import (
    And, Atom, BudgetExceededError, DimensionReport, DloContext, DloError,
    Eq, Exists, Forall, Not, Or, Rat, Var, FALSE, TRUE,
    dimension, evaluate_q, ird_witness_from_dim, order_diagrams,
    parse_formula, parse_partitioned, product, qe_dlo, sat_sample,
    satisfiable_q, standard_grid,
)
from opdim.dlo import DloSet, constants_of, enumerate_diagrams
from opdim.logic import free_vars
from opdim.patterns import check_ird
from opdim.contexts import Constraint

Q = Fraction


def sample_envs(variables, consts, count=1000, seed=0):
    """Exact rational sample points: integers, halves, and the constants
    themselves so boundary cases are hit."""
    rng = random.Random(seed)
    pool = [Q(k) for k in range(-4, 5)] + [Q(k, 2) for k in range(-5, 6)] + \
        [Q(c) for c in consts]
    for _ in range(count):
        yield {v: rng.choice(pool) for v in variables}


def assert_equivalent(f, g, count=1000, seed=0):
    variables = sorted(free_vars(f) | free_vars(g))
    consts = constants_of(f) | constants_of(g)
    for env in sample_envs(variables, consts, count, seed):
        assert evaluate_q(f, env) == evaluate_q(g, env), env


def random_qf_formula(rng, variables, consts, depth=3):
    if depth == 0 or rng.random() < 0.3:
        terms = [Var(v) for v in variables] + [Rat(Q(c)) for c in consts]
        a, b = rng.choice(terms), rng.choice(terms)
        return Atom("<", (a, b)) if rng.random() < 0.7 else Eq(a, b)
    kind = rng.randrange(3)
    if kind == 0:
        return Not(random_qf_formula(rng, variables, consts, depth - 1))
    cls = And if kind == 1 else Or
    return cls(random_qf_formula(rng, variables, consts, depth - 1),
               random_qf_formula(rng, variables, consts, depth - 1))


# ---------------------------------------------------------------------------
# Ground evaluation and satisfiability


def test_evaluate_q_atom_and_constant():
    f = parse_formula("x < 3/2")
    assert evaluate_q(f, {"x": Q(1)})
    assert not evaluate_q(f, {"x": Q(3, 2)})


def test_evaluate_q_rejects_quantifiers():
    with pytest.raises(DloError):
        evaluate_q(parse_formula("exists y. x < y"), {"x": Q(0)})


def test_evaluate_q_rejects_unbound():
    with pytest.raises(DloError):
        evaluate_q(parse_formula("x < y"), {"x": Q(0)})


def test_sat_sample_strict_cycle_unsat():
    assert sat_sample(parse_formula("x < y & y < x")) is None


def test_sat_sample_respects_constants_and_disequalities():
    f = parse_formula("0 < x & x < 1 & ~(x = 1/2) & x < y & y < 1")
    env = sat_sample(f)
    assert env is not None and evaluate_q(f, env)


def test_sat_sample_between_adjacent_constants():
    # nothing fits strictly between equal bounds
    assert sat_sample(parse_formula("0 < x & x < 0")) is None
    env = sat_sample(parse_formula("0 < x & x < 1"))
    assert Q(0) < env["x"] < Q(1)


def test_satisfiable_q_constant_comparisons():
    assert satisfiable_q(parse_formula("0 < 1"))
    assert not satisfiable_q(parse_formula("1 < 0"))


# ---------------------------------------------------------------------------
# Quantifier elimination


def test_qe_exists_between():
    f = parse_formula("exists y. x < y & y < z")
    assert_equivalent(qe_dlo(f), parse_formula("x < z"))


def test_qe_quantifier_free_preserved():
    f = parse_formula("x < y | x = y")
    assert_equivalent(qe_dlo(f), f)


def test_qe_density_sentence_is_true():
    assert qe_dlo(parse_formula("forall x. exists y. x < y")) == TRUE
    assert qe_dlo(parse_formula("forall x. exists y. x < y & y < x")) == FALSE


def test_qe_with_constants():
    f = parse_formula("exists y. x < y & y < 1")
    assert_equivalent(qe_dlo(f), parse_formula("x < 1"))


def test_qe_forall_bounded():
    f = parse_formula("forall y. y < x -> y < z")
    # every rational below x is below z iff x <= z
    assert_equivalent(qe_dlo(f), parse_formula("x < z | x = z"))


def test_qe_random_suite_sampled_equivalence():
    # projecting a variable out is checked against a direct finite witness
    # search on each sample point's diagram grid
    rng = random.Random(8)
    for case in range(20):
        g = random_qf_formula(rng, ["x", "y"], [Q(0), Q(1)])
        f = Exists("y", g)
        qf = qe_dlo(f)
        consts = constants_of(g) | {Q(0), Q(1)}
        for env in sample_envs(["x"], consts, 50, seed=case):
            grid = standard_grid(consts | {env["x"]})
            direct = any(evaluate_q(g, {**env, "y": w}) for w in grid)
            assert evaluate_q(qf, env) == direct, (case, env)


# ---------------------------------------------------------------------------
# Order diagrams


def test_diagram_count_two_free_variables():
    assert len(order_diagrams(TRUE, ["x0", "x1"])) == 3


def test_diagram_count_equality():
    assert len(order_diagrams(parse_formula("x0 = x1"))) == 1


def test_diagram_count_one_variable_one_constant():
    diags = order_diagrams(TRUE, ["x"], extra_consts=[Q(0)])
    assert len(diags) == 3


def test_diagrams_partition_the_formula():
    rng = random.Random(17)
    for case in range(15):
        f = random_qf_formula(rng, ["x0", "x1"], [Q(0)])
        diags = order_diagrams(f)
        union = FALSE
        for d in diags:
            union = Or(union, d.to_formula())
        assert_equivalent(f, union, count=200, seed=case)
        # diagrams are pairwise exclusive: each sample satisfies at most one
        for env in sample_envs(sorted(free_vars(f)), constants_of(f), 100,
                               seed=case + 100):
            hits = sum(evaluate_q(d.to_formula(), env) for d in diags)
            assert hits <= 1


def test_diagram_sample_satisfies_its_formula():
    for d in enumerate_diagrams(["x", "y"], [Q(0), Q(2)]):
        assert evaluate_q(d.to_formula(), d.sample())


# ---------------------------------------------------------------------------
# Dimension


def test_dimension_full_plane():
    rep = dimension(TRUE, 2)
    assert rep.dimension == 2 and not rep.empty


def test_dimension_diagonal():
    rep = dimension(parse_formula("x0 = x1"), 2)
    assert rep.dimension == 1


def test_dimension_halfplane_with_box():
    rep = dimension(parse_formula("x0 < x1"), 2)
    assert rep.dimension == 2 and rep.coords == (0, 1)
    f = parse_formula("x0 < x1")
    lo0, hi0 = rep.box[0]
    lo1, hi1 = rep.box[1]
    # every point of the exhibited open box lies in the set
    for a in (lo0 + (hi0 - lo0) * Q(k, 4) for k in (1, 2, 3)):
        for b in (lo1 + (hi1 - lo1) * Q(k, 4) for k in (1, 2, 3)):
            assert evaluate_q(f, {"x0": a, "x1": b})


def test_dimension_empty_set_distinguished():
    rep = dimension(parse_formula("x0 < x0"), 1)
    assert rep.empty and rep.dimension is None
    assert rep.to_json()["dim"] == "empty"


def test_dimension_point_is_zero():
    rep = dimension(parse_formula("x0 = 0"), 1)
    assert rep.dimension == 0 and not rep.empty


def test_dimension_methods_agree_on_random_suite():
    rng = random.Random(29)
    for _ in range(25):
        f = random_qf_formula(rng, ["x0", "x1"], [Q(0), Q(1)])
        d = dimension(f, 2, method="diagram").dimension
        p = dimension(f, 2, method="projection").dimension
        assert d == p
        dimension(f, 2, method="both")  # raises on disagreement


def test_dimension_monotone_under_inclusion():
    rng = random.Random(31)
    for _ in range(20):
        f = random_qf_formula(rng, ["x0", "x1"], [Q(0)])
        g = random_qf_formula(rng, ["x0", "x1"], [Q(0)])
        both = And(f, g)
        d_sub = dimension(both, 2).dimension
        d_sup = dimension(f, 2).dimension
        if d_sub is None:
            continue
        assert d_sub <= d_sup


def test_dimension_rejects_stray_variables():
    with pytest.raises(DloError):
        dimension(parse_formula("x0 < y"), 1)


# ---------------------------------------------------------------------------
# Pattern witness from dimension


def test_ird_witness_full_plane_depth_two():
    p = ird_witness_from_dim(TRUE, 2)
    assert p.depth == 2 and check_ird(p) == (True, None)


def test_ird_witness_diagonal_depth_one():
    p = ird_witness_from_dim(parse_formula("x0 = x1"), 2)
    assert p.depth == 1 and check_ird(p) == (True, None)


def test_ird_witness_point_is_none():
    assert ird_witness_from_dim(parse_formula("x0 = 0"), 1) is None
    assert ird_witness_from_dim(parse_formula("x0 < x0"), 1) is None


def test_ird_witness_respects_length():
    p = ird_witness_from_dim(TRUE, 1, length=5)
    assert p.length == 5


# ---------------------------------------------------------------------------
# Products


def test_product_point_times_set():
    f = parse_formula("x0 = 0")
    g = parse_formula("0 < x0")
    prod = product(f, 1, g, 1)
    assert dimension(prod, 2).dimension == 1


def test_product_line_times_line():
    prod = product(TRUE, 1, TRUE, 1)
    assert dimension(prod, 2).dimension == 2


def test_product_dimension_additive_on_suite():
    rng = random.Random(41)
    for _ in range(15):
        f = random_qf_formula(rng, ["x0"], [Q(0)])
        g = random_qf_formula(rng, ["x0"], [Q(1)])
        df = dimension(f, 1).dimension
        dg = dimension(g, 1).dimension
        dprod = dimension(product(f, 1, g, 1), 2).dimension
        if df is None or dg is None:
            assert dprod is None
        else:
            assert dprod == df + dg


# ---------------------------------------------------------------------------
# Grids and the symbolic context


def test_standard_grid_no_constants():
    assert standard_grid([]) == [Q(0)]


def test_standard_grid_midpoints_and_padding():
    assert standard_grid([Q(0), Q(1)]) == [Q(-1), Q(0), Q(1, 2), Q(1), Q(2)]


def test_context_fixed_arity():
    ctx = DloContext(2)
    with pytest.raises(DloError):
        ctx.top(3)


def test_context_restrict_and_emptiness():
    ctx = DloContext(1)
    lt = parse_partitioned("x0 ; w : x0 < w")
    s = ctx.restrict(ctx.top(), lt, (Q(0),), 1)   # x0 < 0
    s2 = ctx.restrict(s, lt, (Q(-1),), 0)         # and x0 >= -1
    assert not ctx.is_empty(s2)
    s3 = ctx.restrict(s2, lt, (Q(-2),), 1)        # and x0 < -2: empty
    assert ctx.is_empty(s3)


def test_context_pick_satisfies():
    ctx = DloContext(1)
    s = ctx.to_set(parse_formula("0 < x0 & x0 < 1"))
    (v,) = ctx.pick(s)
    assert Q(0) < v < Q(1)


def test_context_cache_key_is_semantic():
    ctx = DloContext(1)
    a = ctx.to_set(parse_formula("x0 < 1"))
    b = ctx.to_set(parse_formula("~(1 < x0) & ~(x0 = 1)"))
    assert ctx.cache_key(a) == ctx.cache_key(b)


def test_context_candidate_budget():
    ctx = DloContext(1, max_candidates=10)
    phi = parse_partitioned(
        "x0 ; w0 w1 : 0 < w0 & w0 < x0 & x0 < w1 & w1 < 1")
    # grid over constants {0, 1} has five points; 25 pairs exceed the cap
    with pytest.raises(BudgetExceededError):
        ctx.instance_candidates(phi)


def test_context_sat_returns_witness():
    ctx = DloContext(1)
    lt = parse_partitioned("x0 ; w : x0 < w")
    got = ctx.sat(ctx.top(), [Constraint(lt, (Q(0),), 1),
                              Constraint(lt, (Q(-1),), 0)])
    assert got is not None and Q(-1) <= got[0] < Q(0)


def test_context_holds():
    ctx = DloContext(1)
    lt = parse_partitioned("x0 ; w : x0 < w")
    assert ctx.holds(lt, (Q(0),), (Q(1),))
    assert not ctx.holds(lt, (Q(1),), (Q(0),))
