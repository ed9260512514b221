"""The symbolic (Q, <) engine: exact-rational satisfiability, quantifier
elimination by diagram projection, order-diagram cell dimension, and the
context object that lets the rank and pattern machinery run over the dense
order unchanged.

All arithmetic is exact (fractions.Fraction); no floating point anywhere.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction

from .contexts import BudgetExceededError
from .logic import (
    And, Atom, Bot, Eq, Exists, Forall, Imp, Not, Or, Rat, Top, Var,
    FALSE, TRUE, PartitionedFormula, conj_all, disj_all, free_vars, rename_vars,
    signed, subst,
)


class DloError(Exception):
    pass


HALF = Fraction(1, 2)


# ---------------------------------------------------------------------------
# Ground evaluation over the rationals (quantifier-free only)


def _q_term(t, env):
    if isinstance(t, Var):
        try:
            return env[t.name]
        except KeyError:
            raise DloError(f"unbound variable {t.name}") from None
    if isinstance(t, Rat):
        return t.value
    raise DloError(f"term {t!r} has no rational value")


def evaluate_q(f, env=None):
    env = env or {}
    if isinstance(f, Atom):
        if f.rel != "<" or len(f.args) != 2:
            raise DloError(f"relation {f.rel} is not part of the order signature")
        return _q_term(f.args[0], env) < _q_term(f.args[1], env)
    if isinstance(f, Eq):
        return _q_term(f.left, env) == _q_term(f.right, env)
    if isinstance(f, Not):
        return not evaluate_q(f.sub, env)
    if isinstance(f, And):
        return evaluate_q(f.left, env) and evaluate_q(f.right, env)
    if isinstance(f, Or):
        return evaluate_q(f.left, env) or evaluate_q(f.right, env)
    if isinstance(f, Imp):
        return (not evaluate_q(f.left, env)) or evaluate_q(f.right, env)
    if isinstance(f, Top):
        return True
    if isinstance(f, Bot):
        return False
    raise DloError(f"cannot evaluate {f!r} over the rationals (quantifier-free only)")


def constants_of(f):
    out = set()

    def walk(g):
        if isinstance(g, Atom):
            for a in g.args:
                if isinstance(a, Rat):
                    out.add(a.value)
        elif isinstance(g, Eq):
            for a in (g.left, g.right):
                if isinstance(a, Rat):
                    out.add(a.value)
        elif isinstance(g, Not):
            walk(g.sub)
        elif isinstance(g, (And, Or, Imp)):
            walk(g.left)
            walk(g.right)
        elif isinstance(g, (Forall, Exists)):
            walk(g.sub)

    walk(f)
    return out


# ---------------------------------------------------------------------------
# Literal-level satisfiability (disjunctive normal form + order graph)
#
# Nodes are variables ("v", name) or rational constants ("c", value).
# A conjunct is consistent iff the <=-closure has no strict cycle, no
# forced-equal disequalities, and no two distinct constants forced equal.

_CONJUNCT_BOUND = 200_000


def _term_node(t):
    if isinstance(t, Var):
        return ("v", t.name)
    if isinstance(t, Rat):
        return ("c", t.value)
    raise DloError(f"term {t!r} is not symbolic-order material")


def _conjuncts(f, neg=False):
    """Lazily yield DNF conjuncts as frozensets of literals."""
    if isinstance(f, Atom):
        a, b = (_term_node(x) for x in f.args)
        yield frozenset({("le", b, a)}) if neg else frozenset({("lt", a, b)})
        return
    if isinstance(f, Eq):
        a, b = _term_node(f.left), _term_node(f.right)
        yield frozenset({("ne", a, b)}) if neg else frozenset({("eq", a, b)})
        return
    if isinstance(f, Not):
        yield from _conjuncts(f.sub, not neg)
        return
    if isinstance(f, Imp):
        if neg:
            for l in _conjuncts(f.left, False):
                for r in _conjuncts(f.right, True):
                    yield l | r
        else:
            yield from _conjuncts(f.left, True)
            yield from _conjuncts(f.right, False)
        return
    if isinstance(f, (And, Or)):
        conjunctive = isinstance(f, And) != neg
        if conjunctive:
            for l in _conjuncts(f.left, neg):
                for r in _conjuncts(f.right, neg):
                    yield l | r
        else:
            yield from _conjuncts(f.left, neg)
            yield from _conjuncts(f.right, neg)
        return
    if isinstance(f, Top):
        if not neg:
            yield frozenset()
        return
    if isinstance(f, Bot):
        if neg:
            yield frozenset()
        return
    raise DloError(f"cannot normalize {f!r} (quantifier-free only)")


def _scc(nodes, edges):
    """Iterative Tarjan; edges: node -> set of successors."""
    index = {}
    low = {}
    comp = {}
    stack = []
    on_stack = set()
    counter = itertools.count()
    ncomp = itertools.count()
    for root in nodes:
        if root in index:
            continue
        work = [(root, iter(edges.get(root, ())))]
        index[root] = low[root] = next(counter)
        stack.append(root)
        on_stack.add(root)
        while work:
            node, it = work[-1]
            advanced = False
            for succ in it:
                if succ not in index:
                    index[succ] = low[succ] = next(counter)
                    stack.append(succ)
                    on_stack.add(succ)
                    work.append((succ, iter(edges.get(succ, ()))))
                    advanced = True
                    break
                if succ in on_stack:
                    low[node] = min(low[node], index[succ])
            if advanced:
                continue
            work.pop()
            if low[node] == index[node]:
                cid = next(ncomp)
                while True:
                    w = stack.pop()
                    on_stack.discard(w)
                    comp[w] = cid
                    if w == node:
                        break
            if work:
                parent = work[-1][0]
                low[parent] = min(low[parent], low[node])
    return comp


def _solve_conjunct(literals):
    """A satisfying rational assignment for a conjunct, or None."""
    nodes = set()
    lt, le, eq, ne = [], [], [], []
    for kind, a, b in literals:
        nodes.update((a, b))
        if kind == "lt":
            if a[0] == "c" and b[0] == "c":
                if not a[1] < b[1]:
                    return None
                continue
            lt.append((a, b))
        elif kind == "le":
            if a[0] == "c" and b[0] == "c":
                if not a[1] <= b[1]:
                    return None
                continue
            le.append((a, b))
        elif kind == "eq":
            if a[0] == "c" and b[0] == "c":
                if a[1] != b[1]:
                    return None
                continue
            eq.append((a, b))
        else:
            if a[0] == "c" and b[0] == "c":
                if a[1] == b[1]:
                    return None
                continue
            ne.append((a, b))
    consts = sorted(v for (k, v) in nodes if k == "c")
    for c1, c2 in zip(consts, consts[1:]):
        lt.append((("c", c1), ("c", c2)))
    succ = {}
    for a, b in lt + le:
        succ.setdefault(a, set()).add(b)
    for a, b in eq:
        succ.setdefault(a, set()).add(b)
        succ.setdefault(b, set()).add(a)
    comp = _scc(nodes, succ)
    for a, b in lt:
        if comp[a] == comp[b]:
            return None
    for a, b in ne:
        if comp[a] == comp[b]:
            return None
    comp_const = {}
    for node in nodes:
        if node[0] == "c":
            cid = comp[node]
            if cid in comp_const and comp_const[cid] != node[1]:
                return None
            comp_const[cid] = node[1]
    # condensed DAG
    comp_succ = {}
    for a, b in lt + le + eq + [(b, a) for a, b in eq]:
        ca, cb = comp[a], comp[b]
        if ca != cb:
            comp_succ.setdefault(ca, set()).add(cb)
    comps = sorted({comp[n] for n in nodes})
    # topological order (Kahn, deterministic)
    indeg = {c: 0 for c in comps}
    for c, ss in comp_succ.items():
        for s in ss:
            indeg[s] += 1
    ready = sorted(c for c in comps if indeg[c] == 0)
    topo = []
    while ready:
        c = ready.pop(0)
        topo.append(c)
        for s in sorted(comp_succ.get(c, ())):
            indeg[s] -= 1
            if indeg[s] == 0:
                ready.append(s)
        ready.sort()
    if len(topo) != len(comps):
        return None  # leftover cycle (only via lt, already rejected; safety)
    # constant-based bounds
    lo = {}
    hi = {}
    preds = {}
    for p, ss in comp_succ.items():
        for s in ss:
            preds.setdefault(s, set()).add(p)
    for c in topo:
        cands = [comp_const[c]] if c in comp_const else []
        cands += [lo[p] for p in preds.get(c, ()) if lo.get(p) is not None]
        lo[c] = max(cands) if cands else None
    for c in reversed(topo):
        cands = [comp_const[c]] if c in comp_const else []
        cands += [hi[s] for s in comp_succ.get(c, ()) if hi.get(s) is not None]
        hi[c] = min(cands) if cands else None
    value = {}
    ne_comp = [(comp[a], comp[b]) for a, b in ne]
    for c in topo:
        if c in comp_const:
            value[c] = comp_const[c]
            continue
        floor_ = lo[c]
        for p in preds.get(c, ()):
            pv = value[p]
            floor_ = pv if floor_ is None else max(floor_, pv)
        ceil_ = hi[c]
        if floor_ is None and ceil_ is None:
            cand = Fraction(0)
            ceil_anchor = None
        elif floor_ is None:
            cand = ceil_ - 1
            ceil_anchor = ceil_
        elif ceil_ is None:
            cand = floor_ + 1
            ceil_anchor = None
        else:
            cand = (floor_ + ceil_) * HALF
            ceil_anchor = ceil_
        forbidden = set()
        for x, y in ne_comp:
            partner = y if x == c else x if y == c else None
            if partner is None:
                continue
            if partner in value:
                forbidden.add(value[partner])
            elif partner in comp_const:
                # constants are fixed regardless of assignment order
                forbidden.add(comp_const[partner])
        while cand in forbidden:
            cand = cand + 1 if ceil_anchor is None else (cand + ceil_anchor) * HALF
        value[c] = cand
    return {name: value[comp[("v", name)]] for (k, name) in nodes if k == "v"}


def sat_sample(f, bound=_CONJUNCT_BOUND):
    """A satisfying rational assignment for a quantifier-free formula, or None."""
    seen = 0
    for conj in _conjuncts(f):
        seen += 1
        if seen > bound:
            raise BudgetExceededError("disjunctive normal form too large")
        sample = _solve_conjunct(conj)
        if sample is not None:
            return sample
    return None


def satisfiable_q(f):
    return sat_sample(f) is not None


# ---------------------------------------------------------------------------
# Order diagrams


@dataclass(frozen=True)
class OrderDiagram:
    """A complete consistent arrangement of variables and constants: blocks
    in strictly increasing order; members of a block are equal."""

    blocks: tuple  # ((frozenset_of_var_names, const_value_or_None), ...)

    def free_block_count(self):
        return sum(1 for vs, c in self.blocks if vs and c is None)

    def sample(self):
        anchors = [(i, c) for i, (_, c) in enumerate(self.blocks) if c is not None]
        values = {}
        n = len(self.blocks)
        if not anchors:
            for i in range(n):
                values[i] = Fraction(i)
        else:
            for i, c in anchors:
                values[i] = c
            first_i, first_c = anchors[0]
            for i in range(first_i):
                values[i] = first_c - (first_i - i)
            last_i, last_c = anchors[-1]
            for i in range(last_i + 1, n):
                values[i] = last_c + (i - last_i)
            for (i1, c1), (i2, c2) in zip(anchors, anchors[1:]):
                gap = i2 - i1
                for k in range(1, gap):
                    values[i1 + k] = c1 + (c2 - c1) * Fraction(k, gap)
        env = {}
        for i, (vs, _) in enumerate(self.blocks):
            for v in vs:
                env[v] = values[i]
        return env

    def to_formula(self):
        parts = []
        reps = []
        for vs, c in self.blocks:
            ordered = sorted(vs)
            if c is not None:
                reps.append(Rat(c))
                for v in ordered:
                    parts.append(Eq(Var(v), Rat(c)))
            else:
                rep = Var(ordered[0])
                reps.append(rep)
                for v in ordered[1:]:
                    parts.append(Eq(Var(v), rep))
        for r1, r2 in zip(reps, reps[1:]):
            if isinstance(r1, Rat) and isinstance(r2, Rat):
                continue
            parts.append(Atom("<", (r1, r2)))
        return conj_all(parts)


def enumerate_diagrams(variables, consts):
    """All complete arrangements of the variables relative to the constants."""
    base = tuple((frozenset(), c) for c in sorted(set(consts)))
    arrangements = [base]
    for v in sorted(variables):
        nxt = []
        for arr in arrangements:
            for i, (vs, c) in enumerate(arr):
                nxt.append(arr[:i] + ((vs | {v}, c),) + arr[i + 1:])
            for gap in range(len(arr) + 1):
                nxt.append(arr[:gap] + ((frozenset({v}), None),) + arr[gap:])
        arrangements = nxt
    return [OrderDiagram(a) for a in arrangements]


def order_diagrams(f, variables=None, extra_consts=()):
    """The complete consistent diagrams implying a quantifier-free formula;
    their union is exactly the formula."""
    if variables is None:
        variables = sorted(free_vars(f))
    consts = constants_of(f) | set(extra_consts)
    return [d for d in enumerate_diagrams(variables, consts) if evaluate_q(f, d.sample())]


# ---------------------------------------------------------------------------
# Quantifier elimination


def _project(g, var):
    """Existentially project `var` out of a quantifier-free formula."""
    variables = sorted(free_vars(g) | {var})
    remaining = [v for v in variables if v != var]
    consts = constants_of(g)
    keep = []
    seen = set()
    for d in order_diagrams(g, variables):
        blocks = []
        for vs, c in d.blocks:
            vs = vs - {var}
            if vs or c is not None:
                blocks.append((vs, c))
        proj = OrderDiagram(tuple(blocks))
        if proj not in seen:
            seen.add(proj)
            keep.append(proj)
    if not keep:
        return FALSE
    if len(keep) == len(enumerate_diagrams(remaining, consts)):
        return TRUE
    return disj_all(d.to_formula() for d in keep)


def _qe(f):
    if isinstance(f, (Atom, Eq, Top, Bot)):
        return f
    if isinstance(f, Not):
        return Not(_qe(f.sub))
    if isinstance(f, (And, Or, Imp)):
        return type(f)(_qe(f.left), _qe(f.right))
    if isinstance(f, Exists):
        return _project(_qe(f.sub), f.var)
    if isinstance(f, Forall):
        return Not(_project(Not(_qe(f.sub)), f.var))
    raise DloError(f"not a formula: {f!r}")


def qe_dlo(f, variables=None):
    """Equivalent quantifier-free formula, normalized to a canonical
    disjunction of order diagrams over its free variables."""
    g = _qe(f)
    if variables is None:
        variables = sorted(free_vars(g))
    consts = constants_of(g)
    sat = order_diagrams(g, variables)
    if not sat:
        return FALSE
    if len(sat) == len(enumerate_diagrams(variables, consts)):
        return TRUE
    return disj_all(d.to_formula() for d in sat)


# ---------------------------------------------------------------------------
# Dimension


@dataclass(frozen=True)
class DimensionReport:
    dimension: object   # int, or None for the empty set
    method: str
    coords: tuple = None
    box: tuple = None   # per coordinate, an open interval (lo, hi)

    @property
    def empty(self):
        return self.dimension is None

    def to_json(self):
        return {
            "dim": "empty" if self.empty else self.dimension,
            "method": self.method,
            "coords": list(self.coords) if self.coords is not None else None,
            "box": [[str(lo), str(hi)] for lo, hi in self.box] if self.box else None,
        }


def _coord_vars(m):
    return tuple(f"x{i}" for i in range(m))


def _diagram_dimension(qf, variables):
    diags = order_diagrams(qf, variables)
    if not diags:
        return None
    return max(d.free_block_count() for d in diags)


def _box_from_diagram(diag, coords_vars):
    env = diag.sample()
    ordered = []
    for i, (vs, c) in enumerate(diag.blocks):
        ordered.append(env[next(iter(vs))] if vs else c)
    box = []
    for v in coords_vars:
        idx = next(i for i, (vs, _) in enumerate(diag.blocks) if v in vs)
        val = ordered[idx]
        lo_anchor = ordered[idx - 1] if idx > 0 else val - 1
        hi_anchor = ordered[idx + 1] if idx + 1 < len(ordered) else val + 1
        box.append(((lo_anchor + val) * HALF, (val + hi_anchor) * HALF))
    return tuple(box)


def _projection_dimension(qf, m):
    variables = _coord_vars(m)
    for k in range(m, 0, -1):
        for coords in itertools.combinations(range(m), k):
            g = qf
            for i in range(m):
                if i not in coords:
                    g = _project(g, variables[i])
            jvars = [variables[i] for i in coords]
            for diag in order_diagrams(g, jvars):
                open_cell = all(
                    (len(vs) == 1 and c is None) for vs, c in diag.blocks if vs)
                if open_cell:
                    return coords, _box_from_diagram(diag, jvars)
    if satisfiable_q(qf):
        return (), ()
    return None, None


def dimension(f, m, method="both") -> DimensionReport:
    """Dimension of the set defined by f over (Q,<)^m.

    diagram method: maximal number of unconstrained blocks over implying
    diagrams.  projection method: largest coordinate projection containing
    an open box (the box is exhibited).  The empty set gets a distinguished
    report.
    """
    variables = _coord_vars(m)
    extra = free_vars(f) - set(variables)
    if extra:
        raise DloError(f"free variables {sorted(extra)} outside x0..x{m-1}")
    qf = _qe(f)
    if method not in ("diagram", "projection", "both"):
        raise DloError(f"unknown method {method!r}")
    d_dim = _diagram_dimension(qf, variables) if method in ("diagram", "both") else None
    if method == "diagram":
        return DimensionReport(d_dim, "diagram")
    coords, box = _projection_dimension(qf, m)
    p_dim = None if coords is None else len(coords)
    if method == "both" and d_dim != p_dim:
        raise DloError(f"dimension methods disagree: diagram={d_dim} projection={p_dim}")
    return DimensionReport(p_dim, method, coords, box)


def product(f, m0, g, m1):
    """Conjunction on disjoint variables: g's coordinates are shifted up."""
    renaming = {f"x{i}": f"x{m0 + i}" for i in range(m1)}
    extra = free_vars(g) - set(renaming)
    if extra:
        raise DloError(f"free variables {sorted(extra)} outside x0..x{m1 - 1}")
    return And(f, rename_vars(g, renaming))


# ---------------------------------------------------------------------------
# The symbolic context


def standard_grid(consts, pad=1):
    """Constants, midpoints between neighbours, and one point beyond each
    extreme; [0] when there are no constants."""
    consts = sorted(set(Fraction(c) for c in consts))
    if not consts:
        return [Fraction(0)]
    grid = list(consts)
    for a, b in zip(consts, consts[1:]):
        grid.append((a + b) * HALF)
    grid.append(consts[0] - pad)
    grid.append(consts[-1] + pad)
    return sorted(set(grid))


class DloSet:
    """A definable subset of (Q,<)^m, held as a quantifier-free formula."""

    __slots__ = ("formula", "_empty", "_key")

    def __init__(self, formula):
        self.formula = formula
        self._empty = None
        self._key = None

    def __repr__(self):
        from .logic import print_formula
        return f"DloSet({print_formula(self.formula)})"


class DloContext:
    """Exposes the finite-context interface over the symbolic dense order."""

    def __init__(self, num_vars=1, max_candidates=4096):
        self.obj_vars = _coord_vars(num_vars)
        self.arity = num_vars
        self.max_candidates = max_candidates

    def top(self, arity=None):
        if arity not in (None, self.arity):
            raise DloError("symbolic context has a fixed arity")
        return DloSet(TRUE)

    def to_set(self, x):
        if isinstance(x, DloSet):
            return x
        extra = free_vars(x) - set(self.obj_vars)
        if extra:
            raise DloError(f"free variables {sorted(extra)} outside the context sort")
        g = _qe(x)
        return DloSet(g)

    def _instance_body(self, phi: PartitionedFormula, params):
        body = phi.instantiate(tuple(Fraction(p) for p in params))
        if phi.obj_vars != self.obj_vars:
            if len(phi.obj_vars) != self.arity:
                raise DloError("formula object sort does not match the context")
            body = rename_vars(body, dict(zip(phi.obj_vars, self.obj_vars)))
        return body

    def restrict(self, s, phi, params, sign):
        return DloSet(And(s.formula, signed(self._instance_body(phi, params), sign)))

    def is_empty(self, s):
        if s._empty is None:
            s._empty = sat_sample(s.formula) is None
        return s._empty

    def size(self, s):
        return None

    def cache_key(self, s):
        if s._key is None:
            consts = frozenset(constants_of(s.formula))
            diags = frozenset(order_diagrams(s.formula, self.obj_vars))
            s._key = (consts, diags)
        return s._key

    def pick(self, s):
        env = sat_sample(s.formula)
        if env is None:
            raise DloError("cannot pick from an empty set")
        return tuple(env.get(v, Fraction(0)) for v in self.obj_vars)

    def grid(self, *formulas, extra=()):
        consts = set(extra)
        for f in formulas:
            consts |= constants_of(f)
        return standard_grid(consts)

    def instance_candidates(self, phi: PartitionedFormula, s=None):
        consts = constants_of(phi.body)
        if s is not None:
            consts |= constants_of(s.formula)
        grid = standard_grid(consts)
        k = len(phi.param_vars)
        if len(grid) ** k > self.max_candidates:
            raise BudgetExceededError("symbolic parameter grid too large")
        return [tuple(p) for p in itertools.product(grid, repeat=k)]

    def witness_params(self, phi: PartitionedFormula, extra=()):
        grid = standard_grid(constants_of(phi.body) | set(extra))
        k = len(phi.param_vars)
        if len(grid) ** k > self.max_candidates:
            raise BudgetExceededError("symbolic parameter grid too large")
        return [tuple(p) for p in itertools.product(grid, repeat=k)]

    def holds(self, phi: PartitionedFormula, obj, params):
        body = self._instance_body(phi, params)
        env = dict(zip(self.obj_vars, (Fraction(v) for v in obj)))
        return evaluate_q(body, env)

    def sat(self, s, constraints):
        f = s.formula
        for c in constraints:
            f = And(f, signed(self._instance_body(c.phi, c.params), c.sign))
        env = sat_sample(f)
        if env is None:
            return None
        return tuple(env.get(v, Fraction(0)) for v in self.obj_vars)


# ---------------------------------------------------------------------------
# The pattern construction behind the dimension/pattern-depth equality


def ird_witness_from_dim(f, m, length=3):
    """From a positive-dimension set, build the coordinate-comparison
    threshold pattern of depth equal to the dimension: row i compares the
    i-th witnessed projection coordinate, with witnesses marching along a
    grid line of the interior box.  Returns None for empty or 0-dimensional
    sets."""
    from .patterns import IRDPattern, check_ird

    report = dimension(f, m, method="projection")
    if report.empty or report.dimension == 0:
        return None
    ctx = DloContext(m)
    formulas = []
    witnesses = []
    for i, coord in enumerate(report.coords):
        psi = PartitionedFormula(
            Atom("<", (Var(f"x{coord}"), Var("w"))), ctx.obj_vars, ("w",))
        lo, hi = report.box[i]
        row = tuple((lo + (hi - lo) * Fraction(j + 1, length + 1),)
                    for j in range(length))
        formulas.append(psi)
        witnesses.append(row)
    pattern = IRDPattern(ctx, ctx.to_set(f), tuple(formulas), tuple(witnesses))
    ok, failing = check_ird(pattern)
    if not ok:
        raise DloError(f"constructed pattern failed at selector {failing}")
    return pattern
