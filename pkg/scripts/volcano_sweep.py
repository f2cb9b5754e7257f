"""Generator/recognizer roundtrips over small tectonic and ordinary volcanoes."""

import itertools
import time
from math import gcd

from isotower.volcano import (
    TectonicParams, gen_tectonic_volcano, gen_volcano, recognize_tectonic_volcano, recognize_volcano,
)


def sweep(bound=4, depths=range(4), ls=(2, 3), max_crater=6):
    fails = []
    for r, s, t in itertools.product(range(1, bound + 1), repeat=3):
        for c in range(1, r + 1):
            if gcd(c, r) != 1:
                continue
            for l, D in itertools.product(ls, depths):
                V = gen_tectonic_volcano(l, TectonicParams(r, s, t, c), D)
                if not recognize_tectonic_volcano(V.graph, D, l).ok:
                    fails.append(("tectonic", r, s, t, c, l, D))
    for l, D, size, kind in itertools.product(ls, depths, range(1, max_crater + 1), ("cycle", "isolated")):
        V = gen_volcano(l, (kind, size), D)
        if not recognize_volcano(V.graph, D, l).ok:
            fails.append((kind, size, l, D))
    return fails


if __name__ == "__main__":
    t0 = time.perf_counter()
    fails = sweep()
    print(f"{len(fails)} failures in {time.perf_counter() - t0:.1f}s")
    for f in fails:
        print(" ", f)
