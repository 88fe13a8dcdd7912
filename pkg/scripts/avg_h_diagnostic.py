"""How often does a binding cap raise share-weighted average H?

Capping H lowers the hallucination rate of the affected products but also
makes them cheaper, so demand can shift toward them.  This script draws
random (scenario, cap) pairs and reports how often the average rises, and
whether the signs of components II and III hold when it falls.
"""

import argparse

import numpy as np

from hallucination_standards.oracle import random_scenario
from hallucination_standards.policy import decompose


def main():
    parser = argparse.ArgumentParser(description="average-H sign diagnostic")
    parser.add_argument("--draws", type=int, default=5000)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()

    rng = np.random.default_rng(args.seed)
    rose = sign_bad = 0
    worst_rise = 0.0
    for _ in range(args.draws):
        sc = random_scenario(rng, h_range=(0.01, 1.0))
        cap = float(rng.uniform(sc.cost.h_lo, sc.cost.h_hi))
        rep = decompose(sc, cap)
        if rep.avg_h_decreased:
            if rep.comp_ii < 0 or (sc.domain.zeta > 0 and rep.comp_iii < 0):
                sign_bad += 1
        else:
            rose += 1
            worst_rise = max(worst_rise, rep.avg_h_after - rep.avg_h_before)
    print(f"draws={args.draws} seed={args.seed}")
    print(f"average H rose (or stayed) under the cap: {rose} ({rose / args.draws:.2%}),"
          f" largest rise {worst_rise:.3e}")
    print(f"sign violations when it fell: {sign_bad}")


if __name__ == "__main__":
    main()
