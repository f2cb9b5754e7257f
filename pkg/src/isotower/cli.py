"""Command-line front door: build graphs, audit theorems, export DOT and JSON."""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
import tempfile
from dataclasses import asdict, dataclass, field
from pathlib import Path

from .errors import CapExceeded, ParameterError, TheoremCheckFailure

SCHEMA = 1
THEOREMS = ("thm41", "cor210", "thm32", "cor33", "cor45", "prop53", "cor56")
EXIT_OK, EXIT_THEOREM, EXIT_PARAMS, EXIT_CAP = 0, 1, 2, 3

log = logging.getLogger("isotower")


@dataclass
class ExperimentConfig:
    command: str
    q: int | None = None
    k: int | None = None
    l: int | None = None
    p: int | None = None
    N: int = 1
    n: int = 1
    curves: tuple[str, ...] = ()
    out_dir: Path = Path("out")
    cap_field: int = 10**7
    cap_graph: int = 6 * 10**6
    seed: int = 0
    theorems: tuple[str, ...] = THEOREMS
    extra: dict = field(default_factory=dict)

    def tower_params(self):
        from .tower import TowerParams

        missing = [name for name in ("q", "l", "p") if getattr(self, name) is None]
        if missing:
            raise ParameterError(f"missing --{', --'.join(missing)}")
        return TowerParams(self.q, self.l, self.p, self.N, self.n, self.k, tuple(self.curves),
                           cap_field=self.cap_field, cap_graph=self.cap_graph).validate()


def threads() -> int:
    raw = os.environ.get("ISOTOWER_THREADS", "1")
    try:
        value = int(raw)
    except ValueError:
        raise ParameterError(f"ISOTOWER_THREADS must be an integer, got {raw!r}") from None
    if value < 1:
        raise ParameterError("ISOTOWER_THREADS must be positive")
    return value


def write_atomic(path: Path, text: str):
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.chmod(tmp, 0o644)
        os.replace(tmp, path)
    except BaseException:
        os.unlink(tmp)
        raise


def dumps(obj) -> str:
    return json.dumps(obj, indent=1, sort_keys=True, default=_jsonable) + "\n"


def _jsonable(x):
    if hasattr(x, "item"):
        return x.item()
    if hasattr(x, "tolist"):
        return x.tolist()
    if isinstance(x, Path):
        return str(x)
    if isinstance(x, (set, frozenset, tuple)):
        return sorted(x) if isinstance(x, (set, frozenset)) else list(x)
    return str(x)


def _report(cfg: ExperimentConfig, body: dict) -> dict:
    cfg_json = {k: v for k, v in asdict(cfg).items() if k != "extra"}
    cfg_json.update(cfg.extra)
    return {"schema": SCHEMA, "command": cfg.command, "config": cfg_json, **body}


# commands -----------------------------------------------------------------

def cmd_build(cfg: ExperimentConfig) -> int:
    from .tower import Tower

    T = Tower(cfg.tower_params())
    levels = []
    for n in range(cfg.n + 1):
        X, _ = T.derived(n)
        count, labels = T.component_labels(n)
        name = f"level_{n}.dot"
        write_atomic(cfg.out_dir / name, X.to_dot(f"X{n}", vertex_colors=labels))
        levels.append({"n": n, "vertices": X.n, "edges": X.n_edges, "components": count, "file": name})
    steps = [{"edge": st.encode(), "voltage": T.g[i].encode(), "level_matrix": T.h[i].encode()}
             for i, st in enumerate(T.steps)]
    body = {"k": T.k, "curves": [E.encode() for E in T.curves], "steps": steps, "levels": levels,
            "base": {"vertices": T.base.n, "edges": T.base.n_edges,
                     "components": T.base_components[0]}}
    write_atomic(cfg.out_dir / "manifest.json", dumps(_report(cfg, body)))
    for lv in levels:
        print(f"level {lv['n']}: {lv['vertices']} vertices, {lv['edges']} edges, "
              f"{lv['components']} components")
    return EXIT_OK


def _verdict(ok) -> str:
    return {True: "pass", False: "fail", None: "undecided"}[ok]


def run_audits(T, theorems) -> dict:
    """Verdict per theorem tag with the supporting data as witness."""
    n_max = T.params.n_max
    needs_gl2 = {"thm41", "cor210", "thm32", "cor33", "cor45"} & set(theorems)
    reports = T.classify_components() if needs_gl2 else []
    ss = [r for r in reports if r.reduction_type == "supersingular"]
    od = [r for r in reports if r.reduction_type == "ordinary"]
    out = {}
    if "thm41" in theorems:
        if ss:
            rows = [T.thm41(n) for n in range(n_max + 1)]
            out["thm41"] = {"verdict": _verdict(all(r["pass"] for r in rows)), "levels": rows}
        else:
            out["thm41"] = {"verdict": "undecided", "reason": "no supersingular component"}
    if "cor210" in theorems:
        rows = [T.galois_audit(r.component, n) for r in ss for n in range(1, n_max + 1)]
        flags = [r["galois"] for r in rows]
        ok = None if not rows or None in flags else all(flags)
        out["cor210"] = {"verdict": _verdict(ok), "audits": rows}
    if "thm32" in theorems or "cor33" in theorems:
        fits = [r.to_json() for r in od]
        reached = [r for r in od if r.fit.get("status") == "onset reached"]
        if "thm32" in theorems:
            if not od:
                out["thm32"] = {"verdict": "undecided", "reason": "no ordinary component"}
            else:
                ok = True if reached and all(r.fit["c_bound_ok"] for r in reached) else None
                out["thm32"] = {"verdict": _verdict(ok), "components": fits}
        if "cor33" in theorems:
            rows = [T.galois_audit(r.component, n_max) for r in od] if n_max >= 1 else []
            if not rows:
                out["cor33"] = {"verdict": "undecided", "reason": "no ordinary component at n >= 1"}
            else:
                non_galois = [a["galois"] is False for a in rows]
                ok = True if all(non_galois) else (False if reached and len(reached) == len(od) else None)
                out["cor33"] = {"verdict": _verdict(ok), "audits": rows}
    if "cor45" in theorems:
        a = T.cor45_audit() if ss else {"status": "undecided", "reason": "no supersingular component"}
        out["cor45"] = {"verdict": _verdict(a.get("pass")) if "pass" in a else "undecided", **a}
    if "prop53" in theorems:
        rows = [T.prop53(n) for n in range(n_max + 1)]
        out["prop53"] = {"verdict": _verdict(all(r["pass"] for r in rows)), "levels": rows,
                         "thm55": T.thm55()}
    if "cor56" in theorems:
        a = T.y_tower_audit()
        verdict = {"pass": "pass", "fail": "fail"}.get(a.get("status"), "undecided")
        out["cor56"] = {"verdict": verdict, **a}
    return out


def _write_audit(cfg: ExperimentConfig, T, results: dict, name: str) -> int:
    body = {"k": T.k, "curves": len(T.S), "steps": len(T.steps), "results": results}
    write_atomic(cfg.out_dir / name, dumps(_report(cfg, body)))
    for tag, res in results.items():
        print(f"{tag}: {res['verdict']}")
    return EXIT_THEOREM if any(r["verdict"] == "fail" for r in results.values()) else EXIT_OK


def cmd_audit(cfg: ExperimentConfig) -> int:
    from .tower import Tower

    T = Tower(cfg.tower_params())
    return _write_audit(cfg, T, run_audits(T, cfg.theorems), "audit.json")


def cmd_y_tower(cfg: ExperimentConfig) -> int:
    from .tower import Tower

    T = Tower(cfg.tower_params())
    for n in range(cfg.n + 1):
        Y, _ = T.y_derived(n)
        write_atomic(cfg.out_dir / f"y_level_{n}.dot", Y.to_dot(f"Y{n}"))
    return _write_audit(cfg, T, run_audits(T, ("prop53", "cor56")), "y_tower.json")


def cmd_density(cfg: ExperimentConfig) -> int:
    from .matgroup import density_target, generator_density

    if cfg.p is None:
        raise ParameterError("density needs --p")
    bound = cfg.extra.get("bound", 10**5)
    got = generator_density(cfg.p, cfg.N, bound, threads())
    want = density_target(cfg.p)
    diff = abs(float(got) - float(want))
    ok = diff <= 0.02
    body = {"p": cfg.p, "N": cfg.N, "bound": bound, "fraction": str(got), "value": float(got),
            "target": str(want), "difference": diff, "verdict": _verdict(ok)}
    write_atomic(cfg.out_dir / "density.json", dumps(_report(cfg, body)))
    print(f"density p={cfg.p} N={cfg.N}: {float(got):.4f} (target {want} = {float(want):.4f})")
    return EXIT_OK if ok else EXIT_THEOREM


def _read_graph(path: Path):
    from .voltgraph import DirectedMultigraph

    try:
        text = path.read_text()
    except OSError as exc:
        raise ParameterError(f"cannot read {path}: {exc}") from None
    try:
        if path.suffix == ".json":
            data = json.loads(text)
            return DirectedMultigraph.from_json(data.get("graph", data))
        return DirectedMultigraph.from_dot(text)
    except (ValueError, KeyError, TypeError) as exc:
        raise ParameterError(f"malformed graph file {path}: {exc}") from None


def cmd_volcano(cfg: ExperimentConfig) -> int:
    from . import volcano as V

    x = cfg.extra
    if x["action"] == "gen":
        depth = x.get("depth")
        depth = 0 if depth is None else depth
        if x.get("tectonic"):
            p = V.TectonicParams.parse(x["tectonic"])
            if depth > 0:
                G = V.gen_tectonic_volcano(cfg.l or 2, p, depth).graph
                name = f"tectonic_volcano_{p.r}_{p.s}_{p.t}_{p.c}_l{cfg.l or 2}_D{depth}"
            else:
                G = V.gen_tectonic_crater(p)
                name = f"tectonic_{p.r}_{p.s}_{p.t}_{p.c}"
        else:
            kind, _, size = x.get("crater", "cycle:3").partition(":")
            try:
                size = int(size)
            except ValueError:
                raise ParameterError(f"crater must look like cycle:L or isolated:n, got {x['crater']!r}") from None
            G = V.gen_volcano(cfg.l or 2, (kind, size), depth).graph
            name = f"volcano_{kind}{size}_l{cfg.l or 2}_D{depth}"
        if x.get("intertwine"):
            G = V.double_intertwine(G)
            name += "_pm"
        write_atomic(cfg.out_dir / f"{name}.dot", G.to_dot("Z"))
        write_atomic(cfg.out_dir / f"{name}.json", dumps(_report(cfg, {"graph": G.to_json()})))
        print(f"{name}: {G.n} vertices, {G.n_edges} edges -> {cfg.out_dir / (name + '.dot')}")
        return EXIT_OK
    if not x.get("input"):
        raise ParameterError("volcano recognize needs an input file")
    X = _read_graph(Path(x["input"]))
    verdict = V.recognize(X, x["cls"], D=x.get("depth"), l=cfg.l)
    write_atomic(cfg.out_dir / "recognize.json", dumps(_report(cfg, verdict.to_json())))
    line = f"{verdict.cls}: {verdict.status}"
    if verdict.ok and {"r", "s", "t", "c"} <= verdict.params.keys():
        pr = verdict.params
        line += f" (r,s,t,c)=({pr['r']},{pr['s']},{pr['t']},{pr['c']})"
    elif verdict.ok and verdict.cls == "double_intertwinement":
        line += f" quotient has {verdict.params['quotient_vertices']} vertices"
    for reason in verdict.reasons:
        line += f"\n  failed: {reason}"
    print(line)
    return EXIT_OK


COMMANDS = {"build": cmd_build, "audit": cmd_audit, "y-tower": cmd_y_tower,
            "density": cmd_density, "volcano": cmd_volcano}


# argument parsing -----------------------------------------------------------

def _common(sp: argparse.ArgumentParser, tower: bool = True):
    sp.add_argument("--out-dir", type=Path, default=Path("out"))
    sp.add_argument("--seed", type=int, default=0)
    if tower:
        sp.add_argument("--q", type=int)
        sp.add_argument("--k", type=int)
        sp.add_argument("--l", type=int)
        sp.add_argument("--p", type=int)
        sp.add_argument("--N", type=int, default=1)
        sp.add_argument("--n", type=int, default=1, help="top level n_max")
        sp.add_argument("--curve", action="append", default=[], help='seed curve "q,k|a4|a6"')
        sp.add_argument("--cap-field", type=int, default=10**7)
        sp.add_argument("--cap-graph", type=int, default=6 * 10**6)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="isotower", description=__doc__)
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)
    _common(sub.add_parser("build", help="build X(p^n N) for n <= --n, write DOT and a manifest"))
    a = sub.add_parser("audit", help="verify the theorem suite on one instance")
    _common(a)
    a.add_argument("--theorem", action="append", choices=THEOREMS,
                   help="restrict to these tags (repeatable)")
    _common(sub.add_parser("y-tower", help="Y-graphs: direct versus derived, deck groups"))
    d = sub.add_parser("density", help="fraction of primes l generating (Z/N p^2)^x")
    _common(d)
    d.add_argument("--bound", type=int, default=10**5)
    v = sub.add_parser("volcano", help="generate or recognize volcano-type graphs")
    vsub = v.add_subparsers(dest="action", required=True)
    g = vsub.add_parser("gen")
    _common(g, tower=False)
    g.add_argument("--l", type=int, default=2)
    g.add_argument("--crater", default="cycle:3", help="cycle:L or isolated:n")
    g.add_argument("--depth", type=int, default=0)
    g.add_argument("--tectonic", help="r,s,t,c")
    g.add_argument("--intertwine", action="store_true")
    r = vsub.add_parser("recognize")
    _common(r, tower=False)
    r.add_argument("--class", dest="cls", required=True,
                   help="crater, volcano, tectonic_crater, tectonic_volcano or double_intertwinement")
    r.add_argument("--depth", type=int)
    r.add_argument("--l", type=int)
    r.add_argument("input")
    return ap


def config_from_args(ns: argparse.Namespace) -> ExperimentConfig:
    cfg = ExperimentConfig(ns.command, out_dir=ns.out_dir, seed=ns.seed)
    for name in ("q", "k", "l", "p", "N", "n", "cap_field", "cap_graph"):
        if getattr(ns, name, None) is not None:
            setattr(cfg, name, getattr(ns, name))
    cfg.curves = tuple(getattr(ns, "curve", ()) or ())
    if getattr(ns, "theorem", None):
        cfg.theorems = tuple(ns.theorem)
    if ns.command == "density":
        cfg.extra["bound"] = ns.bound
    if ns.command == "volcano":
        cfg.extra["action"] = ns.action
        for name in ("crater", "depth", "tectonic", "intertwine", "cls", "input"):
            if hasattr(ns, name):
                cfg.extra[name] = getattr(ns, name)
    return cfg


def main(argv=None) -> int:
    ap = build_parser()
    try:
        ns = ap.parse_args(argv)
    except SystemExit as exc:
        return EXIT_PARAMS if exc.code else EXIT_OK
    logging.basicConfig(level=logging.INFO if ns.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        threads()
        return COMMANDS[ns.command](config_from_args(ns))
    except ParameterError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARAMS
    except CapExceeded as exc:
        print(f"cap exceeded: {exc}", file=sys.stderr)
        return EXIT_CAP
    except TheoremCheckFailure as exc:
        print(f"theorem check failed: {exc}", file=sys.stderr)
        return EXIT_THEOREM


if __name__ == "__main__":
    sys.exit(main())
