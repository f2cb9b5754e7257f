"""Volcano graphs, tectonic craters and double intertwinements.

Volcanoes are infinite; everything here works on depth-D truncations whose
depth-D vertices (the frontier) keep only their ascending edge and are exempt
from the out-degree condition.
"""

from __future__ import annotations

from collections import Counter, defaultdict
from dataclasses import dataclass, field
from math import gcd

import numpy as np

from .errors import ParameterError
from .voltgraph import DirectedMultigraph, components

RECOGNIZE_CAP = 1000  # vertices, for the coloring search only
COLORING_CLASSES = 12


@dataclass(frozen=True)
class TectonicParams:
    r: int
    s: int
    t: int
    c: int

    @classmethod
    def parse(cls, text: str) -> "TectonicParams":
        try:
            r, s, t, c = (int(x) for x in text.split(","))
        except ValueError:
            raise ParameterError(f"expected r,s,t,c, got {text!r}") from None
        return cls(r, s, t, c)

    def validate(self) -> "TectonicParams":
        if min(self.r, self.s, self.t) < 1 or self.c < 0:
            raise ParameterError("r, s, t must be positive and c nonnegative")
        if gcd(self.c, self.r) != 1:
            raise ParameterError(f"c={self.c} must be coprime to r={self.r}")
        return self

    def canonical(self) -> "TectonicParams":
        """c only matters modulo r; the representative lies in 1..r."""
        return TectonicParams(self.r, self.s, self.t, (self.c - 1) % self.r + 1)

    @property
    def n_vertices(self) -> int:
        return self.r * self.s * self.t

    def as_tuple(self) -> tuple[int, int, int, int]:
        return self.r, self.s, self.t, self.c

    def __str__(self):
        return f"({self.r},{self.s},{self.t},{self.c})"


@dataclass
class DepthDecomposition:
    graph: DirectedMultigraph
    depth: np.ndarray
    frontier: int
    l: int
    crater: str = "cycle"

    def level(self, i: int) -> np.ndarray:
        return np.flatnonzero(self.depth == i)

    def counts(self) -> list[int]:
        return np.bincount(self.depth, minlength=self.frontier + 1).tolist()


@dataclass
class Verdict:
    cls: str
    ok: bool | None
    reasons: list[str] = field(default_factory=list)
    params: dict = field(default_factory=dict)
    witness: dict = field(default_factory=dict)

    def __bool__(self):
        return bool(self.ok)

    @property
    def status(self) -> str:
        return {True: "yes", False: "no", None: "undecided"}[self.ok]

    def to_json(self) -> dict:
        return {"class": self.cls, "verdict": self.status, "reasons": self.reasons,
                "params": self.params, "witness": self.witness}


# generators

def directed_cycle(L: int) -> DirectedMultigraph:
    return DirectedMultigraph.from_edges(L, [(i, (i + 1) % L) for i in range(L)],
                                         vertex_labels=[f"v{i + 1}" for i in range(L)])


def _parse_crater(crater) -> tuple[str, int]:
    kind, size = crater
    if kind not in ("cycle", "isolated") or int(size) < (1 if kind == "cycle" else 0):
        raise ParameterError(f"invalid crater {crater!r}")
    return kind, int(size)


def _grow(l: int, D: int, n0: int, edges: list, free: list[int], colors: list | None,
          labels: list[str]) -> np.ndarray:
    """Hang l-ary trees below the crater; free[v] descending slots per crater vertex."""
    depth = [0] * n0
    frontier = [(v, free[v]) for v in range(n0)]
    for d in range(1, D + 1):
        nxt = []
        for v, slots in frontier:
            for _ in range(slots):
                w = len(depth)
                depth.append(d)
                labels.append(f"d{d}_{w}")
                edges.append((v, w))
                edges.append((w, v))
                if colors is not None:
                    colors += ["black", "black"]
                nxt.append((w, l))
        frontier = nxt
    return np.array(depth, dtype=np.int64)


def gen_volcano(l: int, crater, D: int) -> DepthDecomposition:
    """Depth-D truncation of a volcano with a cycle(L) or isolated(n) crater."""
    if l < 2 or D < 0:
        raise ParameterError("need l >= 2 and D >= 0")
    kind, size = _parse_crater(crater)
    edges = [(i, (i + 1) % size) for i in range(size)] if kind == "cycle" else []
    slots = l if kind == "cycle" else l + 1
    labels = [f"c{i}" for i in range(size)]
    depth = _grow(l, D, size, edges, [slots] * size, None, labels)
    X = DirectedMultigraph.from_edges(len(depth), edges, vertex_labels=labels)
    return DepthDecomposition(X, depth, D, l, kind)


def _tectonic_model(p: TectonicParams):
    """Blue and green permutations on Z^2 / <(s,-ct),(0,rt)>, reps (a,b) with a<s, b<rt."""
    r, s, t, c = p.as_tuple()
    rt = r * t

    def reduce(a, b):
        k, a = divmod(a, s)
        return a, (b + k * c * t) % rt

    reps = [(a, b) for a in range(s) for b in range(rt)]
    idx = {x: i for i, x in enumerate(reps)}
    blue = [idx[reduce(a + 1, b)] for a, b in reps]
    green = [idx[reduce(a, b + 1)] for a, b in reps]
    return blue, green


def gen_tectonic_crater(p: TectonicParams) -> DirectedMultigraph:
    """Vertices numbered along the blue cycles, so (5,1,1,2) matches the drawn example."""
    p = p.validate().canonical()
    blue, green = _tectonic_model(p)
    n = len(blue)
    order, seen = [], [False] * n
    for v0 in range(n):
        v = v0
        while not seen[v]:
            seen[v] = True
            order.append(v)
            v = blue[v]
    pos = {v: i for i, v in enumerate(order)}
    edges = [(pos[v], pos[blue[v]]) for v in order] + [(pos[v], pos[green[v]]) for v in order]
    colors = ["blue"] * n + ["green"] * n
    return DirectedMultigraph.from_edges(n, edges, vertex_labels=[f"v{i + 1}" for i in range(n)],
                                         edge_attrs={"color": colors})


def gen_tectonic_volcano(l: int, p: TectonicParams, D: int) -> DepthDecomposition:
    if l < 2 or D < 0:
        raise ParameterError("need l >= 2 and D >= 0")
    Z = gen_tectonic_crater(p)
    edges = Z.edge_pairs()
    colors = list(Z.edge_attrs["color"])
    labels = list(Z.vertex_labels)
    depth = _grow(l, D, Z.n, edges, [l - 1] * Z.n, colors, labels)
    X = DirectedMultigraph.from_edges(len(depth), edges, vertex_labels=labels,
                                      edge_attrs={"color": colors})
    return DepthDecomposition(X, depth, D, l, "tectonic")


def double_intertwine(Z: DirectedMultigraph) -> DirectedMultigraph:
    """Z^{+-}: vertex v becomes +v (2v) and -v (2v+1); each edge becomes four."""
    names = Z.vertex_labels or [str(v) for v in range(Z.n)]
    labels = [f"{sgn}{names[v]}" for v in range(Z.n) for sgn in "+-"]
    edges, signs, keep = [], [], []
    for e, (a, b) in enumerate(Z.edge_pairs()):
        for i, sa in enumerate("+-"):
            for j, sb in enumerate("+-"):
                edges.append((2 * a + i, 2 * b + j))
                signs.append(sa + sb)
                keep.append(e)
    attrs = {k: [v[e] for e in keep] for k, v in Z.edge_attrs.items()}
    attrs["sign"] = signs
    return DirectedMultigraph.from_edges(2 * Z.n, edges, vertex_labels=labels, edge_attrs=attrs)


# recognizers

def _edge_multiset(X: DirectedMultigraph) -> Counter:
    return Counter(X.edge_pairs())


def _crater_check(X: DirectedMultigraph) -> tuple[str | None, list[str]]:
    if X.n_edges == 0:
        return "isolated", []
    reasons = []
    if X.n_edges != X.n or (X.out_degree != 1).any() or (X.in_degree != 1).any():
        reasons.append("crater: not a directed cycle (in/out-degrees must all be 1)")
    elif components(X)[0] != 1:
        reasons.append("crater: disconnected union of cycles")
    return (None, reasons) if reasons else ("cycle", [])


def recognize_crater(X: DirectedMultigraph) -> Verdict:
    kind, reasons = _crater_check(X)
    return Verdict("crater", kind is not None, reasons, {"kind": kind, "size": X.n} if kind else {})


def _colored_perms(X: DirectedMultigraph, colors) -> tuple[list | None, list[str]]:
    perms = {}
    for col in ("blue", "green"):
        ids = [e for e, c in enumerate(colors) if c == col]
        src = X.src[ids]
        dst = X.dst[ids]
        outs = np.bincount(src, minlength=X.n)
        ins = np.bincount(dst, minlength=X.n)
        if len(ids) != X.n or (outs != 1).any() or (ins != 1).any():
            return None, [f"(c): {col} edges are not a permutation"]
        perm = np.empty(X.n, dtype=np.int64)
        perm[src] = dst
        perms[col] = perm
    if len(colors) != 2 * X.n or any(c not in ("blue", "green") for c in colors):
        return None, ["(b): every edge must be blue or green"]
    return [perms["blue"], perms["green"]], []


def _cycle_lengths(perm: np.ndarray) -> set[int]:
    seen = np.zeros(len(perm), dtype=bool)
    out = set()
    for v in range(len(perm)):
        if seen[v]:
            continue
        k, w = 0, v
        while not seen[w]:
            seen[w] = True
            w = perm[w]
            k += 1
        out.add(k)
    return out


def _power(perm: np.ndarray, k: int) -> np.ndarray:
    out = np.arange(len(perm))
    base = perm.copy()
    while k:
        if k & 1:
            out = base[out]
        base = base[base]
        k >>= 1
    return out


def _tectonic_from_perms(blue: np.ndarray, green: np.ndarray) -> tuple[TectonicParams | None, list[str]]:
    """Read (r,s,t,c) off the blue/green permutations, then check (a)-(e) directly."""
    n = len(blue)
    Lb, Lg = _cycle_lengths(blue), _cycle_lengths(green)
    if len(Lb) != 1 or len(Lg) != 1:
        return None, ["(d): closed paths of one color have different lengths"]
    Lb, Lg = Lb.pop(), Lg.pop()
    gpow = {}
    g = np.arange(n)
    for j in range(1, Lg + 1):
        g = green[g]
        gpow.setdefault(g.tobytes(), j)
    b = np.arange(n)
    s = j = None
    for k in range(1, Lb + 1):
        b = blue[b]
        if b.tobytes() in gpow:
            s, j = k, gpow[b.tobytes()]
            break
    if s is None:
        return None, ["(e): blue and green paths never meet"]
    t = gcd(Lg, j)
    c = j // t
    if Lb % s:
        return None, [f"(d): blue length {Lb} is not a multiple of s={s}"]
    p = TectonicParams(Lb // s, s, t, c)
    reasons = []
    if p.n_vertices != n:
        reasons.append(f"(a): {n} vertices but r*s*t = {p.n_vertices}")
    if Lg != p.r * p.t:
        reasons.append(f"(d): green length {Lg} differs from r*t = {p.r * p.t}")
    if not np.array_equal(_power(blue, s), _power(green, c * t)):
        reasons.append("(e): paths do not meet after s blue and ct green steps")
    return (None, reasons) if reasons else (p, [])


def _colorings(X: DirectedMultigraph):
    """All blue/green colorings satisfying (c), by parity union-find over edges."""
    parent = list(range(X.n_edges))
    parity = [0] * X.n_edges

    def find(e):
        path = []
        while parent[e] != e:
            path.append(e)
            e = parent[e]
        acc = 0
        for x in reversed(path):  # compress, accumulating parity toward the root
            acc ^= parity[x]
            parent[x], parity[x] = e, acc
        return e, (parity[path[0]] if path else 0)

    for lists in (X.out_edges, X.in_edges):
        for es in lists:
            if len(es) != 2:
                return None
            (ra, pa), (rb, pb) = find(es[0]), find(es[1])
            if ra == rb:
                if pa == pb:
                    return []
            else:
                parent[rb], parity[rb] = ra, pa ^ pb ^ 1
    roots = sorted({find(e)[0] for e in range(X.n_edges)})
    if len(roots) > COLORING_CLASSES:
        return "cap"
    rel = [find(e) for e in range(X.n_edges)]
    pos = {r: i for i, r in enumerate(roots)}
    out = []
    for mask in range(1 << len(roots)):
        out.append(["blue" if ((mask >> pos[r]) & 1) ^ p == 0 else "green" for r, p in rel])
    return out


def recognize_tectonic_crater(X: DirectedMultigraph, use_colors: bool = True) -> Verdict:
    """Uses the edge colors when present, otherwise searches all valid 2-colorings."""
    if X.n == 0:
        return Verdict("tectonic_crater", False, ["(a): no vertices"])
    colors = X.edge_attrs.get("color")
    if use_colors and colors is not None and all(c in ("blue", "green") for c in colors):
        perms, reasons = _colored_perms(X, colors)
        if perms is None:
            return Verdict("tectonic_crater", False, reasons)
        p, reasons = _tectonic_from_perms(*perms)
        if p is None:
            return Verdict("tectonic_crater", False, reasons)
        return Verdict("tectonic_crater", True, [], _params_json(p), {"colors": list(colors)})
    if X.n > RECOGNIZE_CAP:
        return Verdict("tectonic_crater", None, [f"coloring search above the {RECOGNIZE_CAP}-vertex cap"])
    options = _colorings(X)
    if options is None:
        return Verdict("tectonic_crater", False, ["(c): in- and out-degrees must all be 2"])
    if options == "cap":
        return Verdict("tectonic_crater", None, ["coloring search above cap"])
    found, reasons = {}, []
    for cols in options:
        perms, why = _colored_perms(X, cols)
        p, why2 = _tectonic_from_perms(*perms) if perms else (None, why)
        if p is None:
            reasons = reasons or why2
            continue
        found.setdefault(p.as_tuple(), cols)
    if not found:
        return Verdict("tectonic_crater", False, reasons or ["(c): no valid 2-coloring"])
    best = min(found)
    return Verdict("tectonic_crater", True, [], _params_json(TectonicParams(*best)),
                   {"colors": found[best], "alternatives": [list(k) for k in sorted(found)]})


def _params_json(p: TectonicParams) -> dict:
    return {"r": p.r, "s": p.s, "t": p.t, "c": p.c}


def _layering(X: DirectedMultigraph, D: int) -> tuple[np.ndarray | None, list[str]]:
    """Forced layering: V_D = out-degree 1 vertices, V_i = new neighbours of V_{i+1}."""
    depth = np.full(X.n, -1, dtype=np.int64)
    cur = np.flatnonzero(X.out_degree == 1)
    if len(cur) == 0:
        return None, ["no frontier vertices (out-degree 1) at depth D"]
    depth[cur] = D
    for i in range(D - 1, 0, -1):
        mark = np.zeros(X.n, dtype=bool)
        mark[cur] = True
        touch = np.zeros(X.n, dtype=bool)
        touch[X.src[mark[X.dst]]] = True
        touch[X.dst[mark[X.src]]] = True
        cur = np.flatnonzero(touch & (depth < 0))
        depth[cur] = i
    depth[depth < 0] = 0
    return depth, []


def _volcano_check(X: DirectedMultigraph, D: int, l: int | None, tectonic: bool) -> Verdict:
    cls = f"{'tectonic_volcano' if tectonic else 'volcano'}({D})"
    if D == 0 or X.n == 0:
        depth = np.zeros(X.n, dtype=np.int64)
    else:
        depth, reasons = _layering(X, D)
        if depth is None:
            return Verdict(cls, False, reasons)
        if l is None:
            l = int(X.out_degree.max()) - 1
    reasons = []
    ds, dt = depth[X.src], depth[X.dst]
    bad = np.flatnonzero((np.abs(ds - dt) != 1) & ~((ds == 0) & (dt == 0)))
    if len(bad):
        e = int(bad[0])
        reasons.append(f"edge {X.src[e]}->{X.dst[e]} joins depths {ds[e]} and {dt[e]}")
    if D > 0 and X.n:
        inner = depth < D
        wrong = np.flatnonzero(inner & (X.out_degree != l + 1))
        if len(wrong):
            reasons.append(f"vertex {wrong[0]} has out-degree {X.out_degree[wrong[0]]}, not l+1 = {l + 1}")
        up = np.bincount(X.src[dt == ds - 1], minlength=X.n)
        down = np.bincount(X.src[dt == ds + 1], minlength=X.n)
        pos = depth >= 1
        for v in np.flatnonzero(pos & (up != 1)):
            reasons.append(f"vertex {v} at depth {depth[v]} has {up[v]} ascending edges")
            break
        for v in np.flatnonzero(pos & inner & (down != l)):
            reasons.append(f"vertex {v} at depth {depth[v]} has {down[v]} descending edges, not l = {l}")
            break
    V0 = np.flatnonzero(depth == 0)
    crater, _ = X.induced(V0)
    if tectonic:
        sub = recognize_tectonic_crater(crater)
        if not sub.ok:
            reasons += [f"crater: {r}" for r in sub.reasons] or ["crater: not a tectonic crater"]
        params = dict(sub.params)
    else:
        kind, why = _crater_check(crater)
        reasons += why
        params = {"crater": kind, "crater_size": len(V0)}
    params["l"] = l
    counts = np.bincount(depth, minlength=D + 1).tolist()
    return Verdict(cls, not reasons, reasons, params, {"depth": depth.tolist(), "level_sizes": counts})


def recognize_volcano(X: DirectedMultigraph, D: int, l: int | None = None) -> Verdict:
    return _volcano_check(X, D, l, tectonic=False)


def recognize_tectonic_volcano(X: DirectedMultigraph, D: int, l: int | None = None) -> Verdict:
    return _volcano_check(X, D, l, tectonic=True)


def recognize_double_intertwinement(X: DirectedMultigraph) -> Verdict:
    """Find a fixed-point-free involution i with X = Z^{+-}.

    Such an i must pair vertices with equal out-neighbour multisets (the edges
    out of +v and -v agree) and equal in-neighbour multisets (every out-multiset
    is i-invariant).  Conversely any pairing inside those twin classes works, so
    the search is a grouping; the witness is still checked by reconstruction.
    """
    cls = "double_intertwinement"
    outs = [tuple(sorted(X.dst[es].tolist())) for es in X.out_edges]
    ins = [tuple(sorted(X.src[es].tolist())) for es in X.in_edges]
    classes = defaultdict(list)
    for v in range(X.n):
        classes[(outs[v], ins[v])].append(v)
    inv = np.full(X.n, -1, dtype=np.int64)
    for members in classes.values():
        if len(members) % 2:
            return Verdict(cls, False, [f"vertex {members[0]} has no twin with the same in- and out-neighbours"])
        for a, b in zip(members[::2], members[1::2]):
            inv[a], inv[b] = b, a
    reps = [v for v in range(X.n) if v < inv[v]]
    cls_of = np.empty(X.n, dtype=np.int64)
    for i, v in enumerate(reps):
        cls_of[v] = cls_of[inv[v]] = i
    is_rep = np.zeros(X.n, dtype=bool)
    is_rep[reps] = True
    keep = np.flatnonzero(is_rep[X.src] & is_rep[X.dst])
    names = X.vertex_labels or [str(v) for v in range(X.n)]
    attrs = {k: [v[e] for e in keep] for k, v in X.edge_attrs.items() if k != "sign"}
    Z = DirectedMultigraph(len(reps), cls_of[X.src[keep]], cls_of[X.dst[keep]],
                           vertex_labels=[_strip_sign(names[v]) for v in reps], edge_attrs=attrs)
    # reconstruction: +[v] -> v, -[v] -> inv(v)
    image = np.empty(2 * len(reps), dtype=np.int64)
    image[0::2] = reps
    image[1::2] = inv[reps]
    W = double_intertwine(Z)
    rebuilt = Counter(zip(image[W.src].tolist(), image[W.dst].tolist()))
    if rebuilt != _edge_multiset(X):
        return Verdict(cls, False, ["twin pairing does not reconstruct the graph"])
    pairing = [[int(v), int(inv[v])] for v in reps]
    return Verdict(cls, True, [], {"quotient_vertices": Z.n, "quotient_edges": Z.n_edges},
                   {"pairing": pairing, "quotient": Z.to_json()})


def _strip_sign(name) -> str:
    name = str(name)
    return name[1:] if name[:1] in "+-" and len(name) > 1 else name


def quotient_of(verdict: Verdict) -> DirectedMultigraph:
    return DirectedMultigraph.from_json(verdict.witness["quotient"])


CLASSES = ("crater", "volcano", "tectonic_crater", "tectonic_volcano", "double_intertwinement")


def recognize(X: DirectedMultigraph, cls: str, D: int | None = None, l: int | None = None) -> Verdict:
    """Dispatch; `cls` may carry the depth inline, as in "volcano(2)"."""
    if "(" in cls:
        cls, arg = cls.rstrip(")").split("(")
        D = int(arg)
    if cls == "crater":
        return recognize_crater(X)
    if cls == "tectonic_crater":
        return recognize_tectonic_crater(X)
    if cls == "double_intertwinement":
        return recognize_double_intertwinement(X)
    if cls in ("volcano", "tectonic_volcano"):
        if D is None or D < 0:
            raise ParameterError(f"{cls} needs a frontier depth D >= 0")
        return _volcano_check(X, D, l, tectonic=cls == "tectonic_volcano")
    raise ParameterError(f"unknown class {cls!r}; choose from {', '.join(CLASSES)}")
