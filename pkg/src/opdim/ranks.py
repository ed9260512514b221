"""Recursive rank calculators: Shelah 2-rank, the n-order rank family, the
branching constraint systems, and op-dimension with its localized variant.

All ranks are truncated at a caller-supplied cap; values at or above the cap
are reported as the sentinel ``at_least_cap`` (the finite proxy for an
infinite rank).
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field

from .contexts import BudgetExceededError, Constraint


class InconsistentTypeError(Exception):
    """The base type has no realizations; ranks are undefined."""


@dataclass(frozen=True)
class RankValue:
    value: int
    capped: bool = False

    def __post_init__(self):
        if self.value < 0:
            raise ValueError("rank values are nonnegative")

    @classmethod
    def exact(cls, v):
        return cls(v, False)

    @classmethod
    def at_least(cls, cap):
        return cls(cap, True)

    def as_ordinal_proxy(self):
        """Comparable key treating at_least_cap as top."""
        return (1, 0) if self.capped else (0, self.value)

    def __ge__(self, other):
        return self.as_ordinal_proxy() >= other.as_ordinal_proxy()

    def __le__(self, other):
        return self.as_ordinal_proxy() <= other.as_ordinal_proxy()

    def to_json(self):
        return {"at_least": self.value} if self.capped else {"exact": self.value}


@dataclass(frozen=True)
class RankQuery:
    context: object
    subset: object
    delta: tuple
    n: int = 1
    cap: int = 6

    def __post_init__(self):
        object.__setattr__(self, "delta", tuple(self.delta))
        if self.n < 1:
            raise ValueError("n must be >= 1")
        if self.cap < 1:
            raise ValueError("cap must be >= 1")
        if not self.delta:
            raise ValueError("Delta must be nonempty")


def _base_set(q: RankQuery):
    ctx = q.context
    s = ctx.to_set(q.subset)
    if ctx.is_empty(s):
        raise InconsistentTypeError("the base type has no realizations")
    return s


class _RankEngine:
    """Memoized computation of 'rank >= r' by the splitting recursion."""

    def __init__(self, context, delta, n, cap):
        self.context = context
        self.delta = delta
        self.n = n
        self.cap = cap
        self.memo = {}

    def instances(self, s):
        ctx = self.context
        out = []
        for phi in self.delta:
            for params in ctx.instance_candidates(phi, s):
                out.append((phi, params))
        return out

    def at_least(self, s, r):
        if r == 0:
            return True
        ctx = self.context
        size = ctx.size(s)
        if size is not None and size < (1 << self.n) ** r:
            # sign cells at distinct branches are pairwise disjoint
            return False
        key = (ctx.cache_key(s), r)
        cached = self.memo.get(key)
        if cached is not None:
            return cached
        cells_per_split = 1 << self.n
        result = False
        for choice in itertools.combinations_with_replacement(self.instances(s), self.n):
            cells = []
            ok = True
            for sigma in itertools.product((1, 0), repeat=self.n):
                cell = s
                for (phi, params), bit in zip(choice, sigma):
                    cell = ctx.restrict(cell, phi, params, bit)
                if ctx.is_empty(cell):
                    ok = False
                    break
                cells.append(cell)
            if not ok or len(cells) != cells_per_split:
                continue
            if all(self.at_least(cell, r - 1) for cell in cells):
                result = True
                break
        self.memo[key] = result
        return result

    def rank(self, s):
        r = 0
        while r < self.cap and self.at_least(s, r + 1):
            r += 1
        if r >= self.cap:
            return RankValue.at_least(self.cap)
        return RankValue.exact(r)


def op_rank(q: RankQuery) -> RankValue:
    """rank >= a+1 iff n instances from Delta split the set into 2^n nonempty
    sign cells, each of rank >= a."""
    s = _base_set(q)
    return _RankEngine(q.context, q.delta, q.n, q.cap).rank(s)


def shelah_rank2(q: RankQuery) -> RankValue:
    """Shelah 2-rank: iterated two-way splitting by single instances."""
    s = _base_set(q)
    engine = _Shelah2Engine(q.context, q.delta, q.cap)
    return engine.rank(s)


class _Shelah2Engine:
    def __init__(self, context, delta, cap):
        self.context = context
        self.delta = delta
        self.cap = cap
        self.memo = {}

    def at_least(self, s, r):
        if r == 0:
            return True
        ctx = self.context
        size = ctx.size(s)
        if size is not None and size < 2 ** r:
            return False
        key = (ctx.cache_key(s), r)
        cached = self.memo.get(key)
        if cached is not None:
            return cached
        result = False
        for phi in self.delta:
            for params in ctx.instance_candidates(phi, s):
                pos = ctx.restrict(s, phi, params, 1)
                neg = ctx.restrict(s, phi, params, 0)
                if ctx.is_empty(pos) or ctx.is_empty(neg):
                    continue
                if self.at_least(pos, r - 1) and self.at_least(neg, r - 1):
                    result = True
                    break
            if result:
                break
        self.memo[key] = result
        return result

    def rank(self, s):
        r = 0
        while r < self.cap and self.at_least(s, r + 1):
            r += 1
        if r >= self.cap:
            return RankValue.at_least(self.cap)
        return RankValue.exact(r)


# ---------------------------------------------------------------------------
# Branching constraint systems


@dataclass
class GammaWitness:
    """Solved branching system: parameters per tree node, witness per leaf."""

    params: dict = field(default_factory=dict)      # node (sign-vector prefix) -> param tuples
    witnesses: dict = field(default_factory=dict)   # leaf branch -> realization

    def to_json(self):
        return {
            "params": {"/".join(map(_fmt_branch, k)): [list(map(str, p)) for p in v]
                       for k, v in self.params.items()},
            "witnesses": {"/".join(map(_fmt_branch, k)): list(map(str, v))
                          for k, v in self.witnesses.items()},
        }


def _fmt_branch(sigma):
    return "".join(str(b) for b in sigma)


def gamma_consistent(context, subset, phi, n, beta, node_bound=4096):
    """Satisfiability of the depth-beta branching system for phi, by explicit
    backtracking.  Parameters are shared along common branch prefixes; the
    leaf for every sign-vector sequence must be realized.

    Returns (True, GammaWitness) or (False, None).
    """
    if (1 << n) ** beta > node_bound:
        raise BudgetExceededError(f"branching system with {(1 << n) ** beta} leaves "
                                  f"exceeds the bound {node_bound}")
    s = context.to_set(subset)
    witness = GammaWitness()

    def solve(prefix, cur, level):
        if context.is_empty(cur):
            return False
        size = context.size(cur)
        if size is not None and size < (1 << n) ** (beta - level):
            # leaves of distinct branches land in pairwise disjoint cells
            return False
        if level == beta:
            witness.witnesses[prefix] = context.pick(cur)
            return True
        for choice in itertools.product(context.instance_candidates(phi, cur),
                                        repeat=n):
            ok = True
            for sigma in itertools.product((0, 1), repeat=n):
                child = cur
                for i in range(n):
                    child = context.restrict(child, phi, choice[i], sigma[i])
                if not solve(prefix + (sigma,), child, level + 1):
                    ok = False
                    break
            if ok:
                witness.params[prefix] = tuple(choice)
                return True
        return False

    if solve((), s, 0):
        return True, witness
    return False, None


# ---------------------------------------------------------------------------
# op-dimension


def op_dimension(context, subset, delta_pool, cap=6, max_n=8):
    """Largest n >= 1 whose n-rank hits the cap for some Delta in the pool;
    0 when no rank does (the stable case)."""
    best = 0
    for n in range(1, max_n + 1):
        hit = False
        for delta in delta_pool:
            rv = op_rank(RankQuery(context, subset, tuple(delta), n=n, cap=cap))
            if rv.capped:
                hit = True
                break
        if not hit:
            break
        best = n
    return best


def localized_opd(context, subset, delta, cap=6, max_n=8):
    """op-dimension relative to a single formula set."""
    return op_dimension(context, subset, [tuple(delta)], cap=cap, max_n=max_n)
