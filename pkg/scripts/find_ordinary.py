"""Search small fields for ordinary components and report their growth fits.

    python3 scripts/find_ordinary.py --l 2 --p 3
"""

import argparse
import json
from dataclasses import asdict, dataclass

from isotower.tower import find_ordinary_instance


@dataclass
class SearchConfig:
    l: int = 2
    p: int = 3
    N: int = 1
    n_max: int = 2
    all: bool = False


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    for name, default in asdict(SearchConfig()).items():
        if isinstance(default, bool):
            ap.add_argument(f"--{name}", action="store_true")
        else:
            ap.add_argument(f"--{name}", type=int, default=default)
    cfg = SearchConfig(**vars(ap.parse_args()))
    for hit in find_ordinary_instance(cfg.l, cfg.p, cfg.N, cfg.n_max, want_onset=not cfg.all):
        P, rep = hit["params"], hit["report"]
        print(json.dumps({"q": P.q, "k": P.k, "seed": P.seed_curves[0], "cm_disc": rep.cm_disc,
                          "counts": rep.counts, "fit": rep.fit}))


if __name__ == "__main__":
    main()
