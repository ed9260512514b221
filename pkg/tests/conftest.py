import itertools
import random

import pytest

from opdim import FiniteStructure, Signature

CHAIN_SIG = Signature((("<", 2),))
R_SIG = Signature((("R", 2),))


def chain(k):
    """The k-element strict linear order 0 < 1 < ... < k-1."""
    universe = tuple(range(k))
    table = frozenset((a, b) for a in universe for b in universe if a < b)
    return FiniteStructure(CHAIN_SIG, universe, {"<": table})


def r_structure(universe, pairs):
    return FiniteStructure(R_SIG, tuple(universe), {"R": frozenset(pairs)})


def r_structure_from_bits(k, bits):
    """The k-element structure whose binary relation is given bit by bit."""
    universe = tuple(range(k))
    pairs = list(itertools.product(universe, repeat=2))
    rel = frozenset(p for i, p in enumerate(pairs) if bits >> i & 1)
    return FiniteStructure(R_SIG, universe, {"R": rel})


def random_r_structure(rng: random.Random, size):
    return r_structure_from_bits(size, rng.randrange(1 << (size * size)))


def grid_2x2():
    """2x2 coordinatewise grid: two orders comparing first/second coordinate."""
    universe = tuple(itertools.product((0, 1), repeat=2))
    sig = Signature((("<0", 2), ("<1", 2)))
    rels = {
        "<0": frozenset((a, b) for a in universe for b in universe if a[0] < b[0]),
        "<1": frozenset((a, b) for a in universe for b in universe if a[1] < b[1]),
    }
    return FiniteStructure(sig, universe, rels)


def equality_structure(k):
    """A structure with no relations at all; only equality is expressible."""
    return FiniteStructure(Signature(()), tuple(range(k)), {})


@pytest.fixture
def chain4():
    return chain(4)
