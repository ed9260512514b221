"""How the splitting rank sees order: chains of growing length.

The one-variable operator rank (equivalently, the Shelah 2-rank) of a finite
chain under the formula x < y grows like log2 of the chain length: every
extra rank level needs both sign classes of a split to keep splitting, which
doubles the number of elements required.
"""
from opdim import (
    FiniteContext, FiniteStructure, RankQuery, Signature, gamma_consistent,
    op_rank, parse_partitioned, shelah_rank2,
)

SIG = Signature((("<", 2),))


def chain(k):
    universe = tuple(range(k))
    table = frozenset((a, b) for a in universe for b in universe if a < b)
    return FiniteStructure(SIG, universe, {"<": table})


def main():
    lt = parse_partitioned("x ; y : x < y", SIG)

    print("rank of the k-element chain under {x < y}:")
    for k in (1, 2, 3, 4, 7, 8, 15, 16):
        ctx = FiniteContext(chain(k))
        q = RankQuery(ctx, ctx.top(1), (lt,), cap=8)
        r1, r2 = op_rank(q), shelah_rank2(q)
        assert r1 == r2
        print(f"  k = {k:2d}:  rank {r1.to_json()}")
    print("doubling the chain buys exactly one more level.\n")

    print("a low cap truncates instead of running forever:")
    ctx = FiniteContext(chain(100))
    q = RankQuery(ctx, ctx.top(1), (lt,), cap=3)
    print(f"  k = 100, cap 3:  rank {op_rank(q).to_json()}\n")

    print("the branching system produces the witnesses behind rank >= 2")
    print("on the 4-element chain:")
    ctx = FiniteContext(chain(4))
    ok, witness = gamma_consistent(ctx, ctx.top(1), lt, 1, 2)
    assert ok
    for prefix, params in sorted(witness.params.items()):
        print(f"  parameters after branch {prefix or '(root)'}: {params}")
    for leaf, element in sorted(witness.witnesses.items()):
        print(f"  leaf {leaf}: realized by {element}")


if __name__ == "__main__":
    main()
