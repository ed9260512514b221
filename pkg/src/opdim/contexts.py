"""Satisfiability contexts for the rank and pattern machinery.

A context answers the queries the recursions need: restrict a definable set
by a signed formula instance, test emptiness, enumerate instance parameters,
and find witnesses for constraint lists.  ``FiniteContext`` wraps a finite
structure (sets are bitmasks over an indexed tuple space); the symbolic
dense-order context lives in ``opdim.dlo`` and exposes the same surface.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass

from .logic import DefinableSubset, FiniteStructure, PartitionedFormula, evaluate


class BudgetExceededError(Exception):
    pass


@dataclass(frozen=True)
class Constraint:
    """A signed instance phi(x, params)^sign along a search branch."""

    phi: PartitionedFormula
    params: tuple
    sign: int


class FiniteContext:
    """Finite-structure context; definable sets are bitmasks over universe^arity."""

    def __init__(self, structure: FiniteStructure):
        self.structure = structure
        self._spaces = {}
        self._sol_cache = {}

    def space(self, arity):
        if arity not in self._spaces:
            tuples = tuple(itertools.product(self.structure.universe, repeat=arity))
            index = {t: i for i, t in enumerate(tuples)}
            self._spaces[arity] = (tuples, index)
        return self._spaces[arity]

    def top(self, arity):
        tuples, _ = self.space(arity)
        return FinSet(arity, (1 << len(tuples)) - 1)

    def to_set(self, subset):
        if isinstance(subset, FinSet):
            return subset
        _, index = self.space(subset.arity)
        mask = 0
        for t in subset.tuples:
            mask |= 1 << index[t]
        return FinSet(subset.arity, mask)

    def to_subset(self, s):
        tuples, _ = self.space(s.arity)
        members = frozenset(tuples[i] for i in range(len(tuples)) if s.mask >> i & 1)
        return DefinableSubset(self.structure, s.arity, members)

    def _solution_mask(self, phi: PartitionedFormula, params):
        key = (phi, params)
        cached = self._sol_cache.get(key)
        if cached is not None:
            return cached
        tuples, _ = self.space(len(phi.obj_vars))
        inst = phi.instantiate(params)
        mask = 0
        for i, t in enumerate(tuples):
            if evaluate(self.structure, inst, dict(zip(phi.obj_vars, t))):
                mask |= 1 << i
        self._sol_cache[key] = mask
        return mask

    def full_mask(self, arity):
        tuples, _ = self.space(arity)
        return (1 << len(tuples)) - 1

    def restrict(self, s, phi, params, sign):
        m = self._solution_mask(phi, params)
        return FinSet(s.arity, s.mask & (m if sign else ~m))

    def is_empty(self, s):
        return s.mask == 0

    def size(self, s):
        return s.mask.bit_count()

    def cache_key(self, s):
        return (s.arity, s.mask)

    def instance_candidates(self, phi: PartitionedFormula, s=None):
        return list(itertools.product(self.structure.universe, repeat=len(phi.param_vars)))

    def holds(self, phi: PartitionedFormula, obj, params):
        return evaluate(self.structure, phi.at(obj, params))

    def pick(self, s):
        """A canonical member of a nonempty set."""
        tuples, _ = self.space(s.arity)
        lowest = (s.mask & -s.mask).bit_length() - 1
        return tuples[lowest]

    def sat(self, s, constraints):
        """First member of s satisfying every signed constraint, or None."""
        cur = s
        for c in constraints:
            cur = self.restrict(cur, c.phi, c.params, c.sign)
            if cur.mask == 0:
                return None
        tuples, _ = self.space(s.arity)
        lowest = (cur.mask & -cur.mask).bit_length() - 1
        return tuples[lowest]

    def witness_params(self, phi: PartitionedFormula, extra=()):
        """Parameter tuples for witness searches; finite contexts use everything."""
        return self.instance_candidates(phi)


@dataclass(frozen=True)
class FinSet:
    arity: int
    mask: int
