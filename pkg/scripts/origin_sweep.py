#!/usr/bin/env python3
"""Found-rate of the common-origin search as the origin bound grows.

Draws sister pairs (split mode) and reports, per bound, how many searches
return a verified witness and how many run out of budget.
"""

from __future__ import annotations

import argparse
import random
import time

from renet.abstraction import Exhausted, search_common_origin, verify_origin
from renet.generate import random_net, random_sister
from renet.net import delta_d


def sister_pairs(seed: int, count: int, max_nodes: int, max_delta: int):
    rng = random.Random(seed)
    pairs = []
    while len(pairs) < count:
        a = random_net(rng, max_nodes=max_nodes)
        if delta_d(a).total > max_delta:
            continue
        b = random_sister(rng, a)
        if b is not None:
            pairs.append((a, b))
    return pairs


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--seed", type=int, default=5)
    ap.add_argument("--pairs", type=int, default=25)
    ap.add_argument("--max-nodes", type=int, default=3)
    ap.add_argument("--max-delta", type=int, default=4)
    ap.add_argument("--bounds", default="2,3,4,5,6")
    args = ap.parse_args()
    pairs = sister_pairs(args.seed, args.pairs, args.max_nodes, args.max_delta)
    print(f"{'bound':>5} {'found':>6} {'exhausted':>9} {'bad':>4} {'secs':>6}")
    for bound in map(int, args.bounds.split(",")):
        t0 = time.perf_counter()
        found = exhausted = bad = 0
        for a, b in pairs:
            w = search_common_origin(a, b, max_origin_nodes=bound)
            if isinstance(w, Exhausted):
                exhausted += 1
            else:
                found += 1
                bad += not verify_origin(w, a, b)
        print(f"{bound:>5} {found:>6} {exhausted:>9} {bad:>4} {time.perf_counter() - t0:>6.1f}")


if __name__ == "__main__":
    main()
