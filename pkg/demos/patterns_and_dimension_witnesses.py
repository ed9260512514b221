"""Threshold patterns, single-hit patterns, and the transform between them.

A threshold (IRD) pattern of depth n certifies that n formulas can each cut
the set at every position of a witness ladder, independently.  A single-hit
(ICT) pattern certifies that each row can be made true at exactly one chosen
witness.  Pairing up consecutive witnesses of an even-length threshold
pattern always yields a single-hit pattern, which is how threshold depth
lower-bounds the dp-rank.
"""
from fractions import Fraction as Q

from opdim import (
    DloContext, check_ict, check_ird, dp_rank_lower, ird_to_ict,
    parse_partitioned, search_ict, search_ird,
)
from opdim.logic import DLO_SIGNATURE


def main():
    ctx = DloContext(1)
    cut = parse_partitioned("x0 ; w : x0 < w", DLO_SIGNATURE)
    grid = [(Q(j),) for j in range(4)]

    print("searching for a depth-1 threshold pattern on Q with x0 < w:")
    res = search_ird(ctx, ctx.top(), [cut], depth=1, length=2,
                     witness_grid=grid)
    pattern = res.pattern
    print(f"  status: {res.status}  (after {res.checks_used} checks)")
    print(f"  witnesses: {pattern.witnesses}")
    ok, _ = check_ird(pattern)
    print(f"  verified exhaustively over all selectors: {ok}\n")

    print("no depth-2 threshold pattern exists on the line itself:")
    res = search_ird(ctx, ctx.top(), [cut], depth=2, length=2,
                     witness_grid=grid)
    print(f"  status: {res.status}  (after {res.checks_used} checks)")
    print("  one order direction can only cut Q once per level.\n")

    print("the even-length pattern transforms into a single-hit pattern:")
    ict = ird_to_ict(pattern)
    ok, _ = check_ict(ict)
    print(f"  rows: {len(ict.formulas)}, witnesses per row: {ict.length}, "
          f"verified: {ok}\n")

    print("intervals witness dp-rank >= 1 on Q:")
    interval = parse_partitioned("x0 ; w0 w1 : w0 < x0 & x0 < w1",
                                 DLO_SIGNATURE)
    pairs = [(Q(2 * k), Q(2 * k + 1)) for k in range(3)]
    bound = dp_rank_lower(ctx, ctx.top(), [interval], cap=1,
                          witness_grid=pairs)
    print(f"  dp_rank_lower = {bound}\n")

    print("on the plane, two coordinates give depth 2:")
    ctx2 = DloContext(2)
    pool = [parse_partitioned("x0 x1 ; w : x0 < w", DLO_SIGNATURE),
            parse_partitioned("x0 x1 ; w : x1 < w", DLO_SIGNATURE)]
    res = search_ird(ctx2, ctx2.top(), pool, depth=2, length=2,
                     witness_grid=grid)
    print(f"  status: {res.status}; witnesses: {res.pattern.witnesses}")
    ok, _ = check_ird(res.pattern)
    print(f"  verified: {ok}")

    print("\nsingle-hit search directly (intervals on the line):")
    res = search_ict(ctx, ctx.top(), [interval], depth=1, length=2,
                     witness_grid=pairs)
    print(f"  status: {res.status}")


if __name__ == "__main__":
    main()
