"""Directed multigraphs, voltage assignments, derived graphs and deck groups."""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from functools import cached_property
from math import factorial, lgamma, log

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components

from .errors import CapExceeded, ParameterError
from .matgroup import FiniteGroup, TableGroup

DEFAULT_DECK_CAP = 10**5


@dataclass
class DirectedMultigraph:
    n: int
    src: np.ndarray
    dst: np.ndarray
    vertex_labels: list | None = None
    edge_labels: list | None = None
    edge_attrs: dict = field(default_factory=dict)

    def __post_init__(self):
        self.src = np.asarray(self.src, dtype=np.int64)
        self.dst = np.asarray(self.dst, dtype=np.int64)
        if len(self.src) != len(self.dst):
            raise ParameterError("src/dst length mismatch")
        if len(self.src) and (self.src.min() < 0 or self.dst.min() < 0
                              or max(self.src.max(), self.dst.max()) >= self.n):
            raise ParameterError("edge endpoint out of range")

    @classmethod
    def from_edges(cls, n: int, edges, **kw) -> "DirectedMultigraph":
        edges = list(edges)
        src = [a for a, _ in edges]
        dst = [b for _, b in edges]
        return cls(n, np.array(src, dtype=np.int64), np.array(dst, dtype=np.int64), **kw)

    @property
    def n_edges(self) -> int:
        return len(self.src)

    @cached_property
    def out_degree(self) -> np.ndarray:
        return np.bincount(self.src, minlength=self.n)

    @cached_property
    def in_degree(self) -> np.ndarray:
        return np.bincount(self.dst, minlength=self.n)

    @cached_property
    def out_edges(self) -> list[list[int]]:
        out = [[] for _ in range(self.n)]
        for e, s in enumerate(self.src.tolist()):
            out[s].append(e)
        return out

    @cached_property
    def in_edges(self) -> list[list[int]]:
        inc = [[] for _ in range(self.n)]
        for e, t in enumerate(self.dst.tolist()):
            inc[t].append(e)
        return inc

    def edge_pairs(self) -> list[tuple[int, int]]:
        return list(zip(self.src.tolist(), self.dst.tolist()))

    def has_multiple_edges(self) -> bool:
        keys = self.src * self.n + self.dst
        return len(np.unique(keys)) < len(keys)

    def induced(self, vertices) -> tuple["DirectedMultigraph", np.ndarray]:
        """Induced subgraph on `vertices` and the old->new vertex map (-1 outside)."""
        vertices = np.asarray(sorted(vertices), dtype=np.int64)
        new = np.full(self.n, -1, dtype=np.int64)
        new[vertices] = np.arange(len(vertices))
        keep = (new[self.src] >= 0) & (new[self.dst] >= 0)
        labels = [self.vertex_labels[v] for v in vertices] if self.vertex_labels else None
        eidx = np.flatnonzero(keep)
        attrs = {k: [v[e] for e in eidx] for k, v in self.edge_attrs.items()}
        elabels = [self.edge_labels[e] for e in eidx] if self.edge_labels else None
        return DirectedMultigraph(len(vertices), new[self.src[keep]], new[self.dst[keep]],
                                  labels, elabels, attrs), new

    # exports

    def to_json(self, extra: dict | None = None) -> dict:
        data = {
            "n_vertices": self.n,
            "vertices": [str(v) for v in self.vertex_labels] if self.vertex_labels else list(range(self.n)),
            "edges": [[int(s), int(t)] for s, t in self.edge_pairs()],
        }
        if self.edge_labels:
            data["edge_labels"] = [str(x) for x in self.edge_labels]
        for k, v in self.edge_attrs.items():
            data[k] = [x if isinstance(x, (int, str)) else str(x) for x in v]
        if extra:
            data.update(extra)
        return data

    @classmethod
    def from_json(cls, data: dict) -> "DirectedMultigraph":
        attrs = {k: data[k] for k in ("color", "voltage") if k in data}
        edges = data["edges"]
        return cls(int(data["n_vertices"]), np.array([e[0] for e in edges], dtype=np.int64),
                   np.array([e[1] for e in edges], dtype=np.int64),
                   vertex_labels=data.get("vertices"), edge_labels=data.get("edge_labels"),
                   edge_attrs=attrs)

    def to_dot(self, name: str = "G", vertex_colors=None) -> str:
        lines = [f"digraph {name} {{"]
        labels = self.vertex_labels or list(range(self.n))
        for v in range(self.n):
            attr = f' [label="{labels[v]}"' + (f', group={int(vertex_colors[v])}' if vertex_colors is not None else "") + "]"
            lines.append(f'  v{v}{attr};')
        for e, (s, t) in enumerate(self.edge_pairs()):
            attrs = [f'{k}="{v[e]}"' for k, v in self.edge_attrs.items()]
            if self.edge_labels:
                attrs.append(f'label="{self.edge_labels[e]}"')
            tail = f" [{', '.join(attrs)}]" if attrs else ""
            lines.append(f"  v{s} -> v{t}{tail};")
        lines.append("}")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_dot(cls, text: str) -> "DirectedMultigraph":
        """Parse the subset of DOT written by `to_dot` (plus bare `a -> b;` lines)."""
        names: dict[str, int] = {}
        labels: list[str] = []
        edges, colors = [], []
        node_re = re.compile(r'^\s*"?([\w+\-]+)"?\s*(\[(.*)\])?\s*;\s*$')
        edge_re = re.compile(r'^\s*"?([\w+\-]+)"?\s*->\s*"?([\w+\-]+)"?\s*(\[(.*)\])?\s*;?\s*$')

        def vid(name, label=None):
            if name not in names:
                names[name] = len(names)
                labels.append(label or name)
            return names[name]

        for line in text.splitlines():
            m = edge_re.match(line)
            if m:
                s, t = vid(m.group(1)), vid(m.group(2))
                attrs = dict(re.findall(r'(\w+)="?([^",\]]*)"?', m.group(4) or ""))
                edges.append((s, t))
                colors.append(attrs.get("color"))
                continue
            m = node_re.match(line)
            if m and m.group(1) not in ("digraph", "graph", "node", "edge"):
                attrs = dict(re.findall(r'(\w+)="?([^",\]]*)"?', m.group(3) or ""))
                vid(m.group(1), attrs.get("label"))
        attrs = {"color": colors} if any(c is not None for c in colors) else {}
        return cls.from_edges(len(names), edges, vertex_labels=labels, edge_attrs=attrs)


def components(X: DirectedMultigraph, mode: str = "weak") -> tuple[int, np.ndarray]:
    """(number of components, label per vertex); labels numbered by first vertex."""
    if mode not in ("weak", "strong"):
        raise ParameterError(f"unknown mode {mode!r}")
    if X.n == 0:
        return 0, np.zeros(0, dtype=np.int64)
    A = csr_matrix((np.ones(X.n_edges, dtype=np.int8), (X.src, X.dst)), shape=(X.n, X.n))
    count, labels = connected_components(A, directed=True, connection=mode)
    _, first = np.unique(labels, return_index=True)
    order = np.argsort(np.argsort(first))
    return int(count), order[labels]


@dataclass
class VoltageAssignment:
    graph: DirectedMultigraph
    group: FiniteGroup
    values: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=np.int64)
        if len(self.values) != self.graph.n_edges:
            raise ParameterError("voltage must be defined on every edge")


@dataclass
class CoveringMap:
    total: DirectedMultigraph
    base: DirectedMultigraph
    vertex_map: np.ndarray
    edge_map: np.ndarray
    voltage: VoltageAssignment | None = None

    @property
    def sheets(self) -> int:
        return self.total.n // max(1, self.base.n)

    def verify(self) -> bool:
        """Incidence preservation and local bijectivity on out- and in-stars."""
        T, B, vm, em = self.total, self.base, self.vertex_map, self.edge_map
        if not (np.array_equal(vm[T.src], B.src[em]) and np.array_equal(vm[T.dst], B.dst[em])):
            return False
        for ends, deg in ((T.src, B.out_degree), (T.dst, B.in_degree)):
            keys = ends * max(1, B.n_edges) + em
            if len(np.unique(keys)) != len(keys):
                return False
            tdeg = np.bincount(ends, minlength=T.n)
            if not np.array_equal(tdeg, deg[vm]):
                return False
        return True

    @cached_property
    def _out_lookup(self) -> dict:
        return dict(zip((self.total.src * max(1, self.base.n_edges) + self.edge_map).tolist(), range(self.total.n_edges)))

    @cached_property
    def _in_lookup(self) -> dict:
        return dict(zip((self.total.dst * max(1, self.base.n_edges) + self.edge_map).tolist(), range(self.total.n_edges)))

    def fiber(self, v: int) -> np.ndarray:
        return np.flatnonzero(self.vertex_map == v)

    def restrict(self, vertices) -> "CoveringMap":
        """Restriction to a union of total components and their image in the base."""
        vertices = np.unique(np.asarray(list(vertices), dtype=np.int64))
        T, B = self.total, self.base
        total, tnew = T.induced(vertices)
        base, bnew = B.induced(np.unique(self.vertex_map[vertices]))
        keep_t = (tnew[T.src] >= 0) & (tnew[T.dst] >= 0)
        keep_b = (bnew[B.src] >= 0) & (bnew[B.dst] >= 0)
        enew = np.cumsum(keep_b) - 1
        voltage = None
        full = self.voltage is not None and total.n == base.n * self.voltage.group.order
        if full and self.voltage.graph is B:  # still a derived graph, same layout
            voltage = VoltageAssignment(base, self.voltage.group, self.voltage.values[keep_b])
        return CoveringMap(total, base, bnew[self.vertex_map[vertices]], enew[self.edge_map[keep_t]], voltage)

    def is_deck(self, perm: np.ndarray) -> bool:
        """Whether a vertex permutation is a deck transformation (vectorized check)."""
        T, vm = self.total, self.vertex_map
        perm = np.asarray(perm, dtype=np.int64)
        if len(perm) != T.n or len(np.unique(perm)) != T.n or not np.array_equal(vm[perm], vm):
            return False
        nb = max(1, self.base.n_edges)
        before = np.sort((T.src * T.n + T.dst) * nb + self.edge_map)
        after = np.sort((perm[T.src] * T.n + perm[T.dst]) * nb + self.edge_map)
        return bool(np.array_equal(before, after))

    def lift_map(self, x0: int, y0: int) -> dict | None:
        """The covering morphism on the component of x0 sending x0 -> y0, if one exists."""
        if self.vertex_map[x0] != self.vertex_map[y0]:
            return None
        T, nb = self.total, max(1, self.base.n_edges)
        outl, inl = self._out_lookup, self._in_lookup
        f = {x0: y0}
        used = {y0}
        stack = [x0]
        src, dst, em = T.src, T.dst, self.edge_map
        while stack:
            x = stack.pop()
            y = f[x]
            for e in T.out_edges[x]:
                e2 = outl.get(y * nb + int(em[e]))
                if e2 is None:
                    return None
                a, b = int(dst[e]), int(dst[e2])
                if a in f:
                    if f[a] != b:
                        return None
                else:
                    if b in used:
                        return None
                    f[a] = b
                    used.add(b)
                    stack.append(a)
            for e in T.in_edges[x]:
                e2 = inl.get(y * nb + int(em[e]))
                if e2 is None:
                    return None
                a, b = int(src[e]), int(src[e2])
                if a in f:
                    if f[a] != b:
                        return None
                else:
                    if b in used:
                        return None
                    f[a] = b
                    used.add(b)
                    stack.append(a)
        return f


def derived_graph(alpha: VoltageAssignment) -> tuple[DirectedMultigraph, CoveringMap]:
    """X(G, alpha): (e, s) links (src e, s) to (dst e, s * alpha(e))."""
    X, G = alpha.graph, alpha.group
    n = G.order
    sig = np.arange(n, dtype=np.int64)
    rt = {}
    dst_sig = np.empty((X.n_edges, n), dtype=np.int64)
    for e, g in enumerate(alpha.values.tolist()):
        if g not in rt:
            rt[g] = G.right_translation(g)
        dst_sig[e] = rt[g]
    src = (X.src[:, None] * n + sig[None, :]).ravel()
    dst = (X.dst[:, None] * n + dst_sig).ravel()
    total = DirectedMultigraph(X.n * n, src, dst)
    vmap = np.repeat(np.arange(X.n, dtype=np.int64), n)
    emap = np.repeat(np.arange(X.n_edges, dtype=np.int64), n)
    cover = CoveringMap(total, X, vmap, emap, alpha)
    assert total.n == X.n * n and total.n_edges == X.n_edges * n
    return total, cover


def _require_connected(X: DirectedMultigraph):
    if components(X, "weak")[0] != 1:
        raise ParameterError("base graph must be connected")


def component_orbit_count(alpha: VoltageAssignment, v: int = 0) -> int:
    """|G| / d_v with d_v = #{g : (v,g) ~ (v,1)}, cross-checked against a direct count."""
    _require_connected(alpha.graph)
    G = alpha.group
    total, _ = derived_graph(alpha)
    count, labels = components(total, "weak")
    n = G.order
    fiber = labels[v * n : (v + 1) * n]
    d_v = int(np.count_nonzero(fiber == fiber[G.identity]))
    if n % d_v:
        raise AssertionError("d_v does not divide |G|")
    if n // d_v != count:
        raise AssertionError(f"orbit count {n // d_v} != component count {count}")
    return n // d_v


def transitivity_check(alpha: VoltageAssignment) -> bool:
    """Left multiplication by G permutes the derived components transitively."""
    _require_connected(alpha.graph)
    G = alpha.group
    total, _ = derived_graph(alpha)
    count, labels = components(total, "weak")
    n = G.order
    v = np.arange(total.n) // n
    s = np.arange(total.n) % n
    start = labels[G.identity]  # component of (0, 1)
    reached = set()
    for g in range(n):
        moved = labels[v * n + G.left_translation(g)[s]]
        # g must send whole components to whole components
        if len(np.unique(labels * count + moved)) != count:
            return False
        reached.add(int(moved[G.identity]))
    return len(reached) == count and start in reached


def _component_info(c: CoveringMap):
    count, labels = components(c.total, "weak")
    f0 = c.fiber(0)
    return count, labels, f0


def deck_group_order(c: CoveringMap) -> int:
    """|Deck(total/base)|, from component isomorphism classes (no enumeration)."""
    _require_connected(c.base)
    count, labels, f0 = _component_info(c)
    reps: dict[int, int] = {}
    for x in f0.tolist():
        reps.setdefault(int(labels[x]), x)
    classes: list[list[int]] = []
    for comp, x in sorted(reps.items()):
        for cl in classes:
            if c.lift_map(reps[cl[0]], x) is not None:
                cl.append(comp)
                break
        else:
            classes.append([comp])
    order = 1
    for cl in classes:
        x = reps[cl[0]]
        aut = sum(1 for y in f0.tolist() if labels[y] == cl[0] and c.lift_map(x, y) is not None)
        order *= factorial(len(cl)) * aut ** len(cl)
    return order


def deck_transformations(c: CoveringMap, cap: int = DEFAULT_DECK_CAP) -> list[np.ndarray]:
    """All deck transformations as vertex permutations (fiber-respecting backtracking)."""
    _require_connected(c.base)
    order = deck_group_order(c)
    if order > cap:
        raise CapExceeded(f"deck group of order {order} exceeds cap {cap}")
    count, labels, f0 = _component_info(c)
    comps = sorted({int(labels[x]) for x in f0.tolist()})
    rep = {}
    for x in f0.tolist():
        rep.setdefault(int(labels[x]), x)
    out: list[np.ndarray] = []

    def extend(i, perm, used):
        if i == len(comps):
            out.append(perm.copy())
            return
        x = rep[comps[i]]
        for y in f0.tolist():
            if int(labels[y]) in used:
                continue
            f = c.lift_map(x, y)
            if f is None:
                continue
            keys = np.fromiter(f.keys(), dtype=np.int64)
            perm[keys] = np.fromiter(f.values(), dtype=np.int64)
            extend(i + 1, perm, used | {int(labels[y])})

    extend(0, np.full(c.total.n, -1, dtype=np.int64), frozenset())
    assert len(out) == order
    return out


@dataclass
class GaloisVerdict:
    galois: bool
    reason: str
    components: int
    deck_order: int | None = None


def factorial_exceeds(d: int, n: int) -> bool:
    """d! > n, without forming huge factorials."""
    if d < 200:
        return factorial(d) > n
    return lgamma(d + 1) > log(n) + 1


def is_galois(c: CoveringMap, shortcut: bool = True, check_group: bool = True) -> GaloisVerdict:
    """Galois iff the deck group acts simply transitively on the fiber over vertex 0."""
    _require_connected(c.base)
    count, labels, f0 = _component_info(c)
    G = c.voltage.group if c.voltage is not None else None
    if shortcut and G is not None and factorial_exceeds(count, G.order):
        return GaloisVerdict(False, "components d satisfy d! > |G|", count)
    x0 = int(f0[0])
    if not all(c.lift_map(x0, int(y)) is not None for y in f0):
        return GaloisVerdict(False, "deck group not transitive on a fiber", count)
    order = len(f0) if count == 1 else deck_group_order(c)
    if order != len(f0):
        return GaloisVerdict(False, "deck group transitive but larger than the sheet count", count, order)
    if count == 1 and G is not None and check_group:
        _assert_deck_is_left_multiplication(c)
    return GaloisVerdict(True, "deck group simply transitive on a fiber", count, order)


def _assert_deck_is_left_multiplication(c: CoveringMap):
    """For a connected derived graph the deck maps are (v,s) -> (v,g s), g in G."""
    G = c.voltage.group
    n = G.order
    nv = c.base.n
    x0 = G.identity  # vertex (0, 1)
    for g in range(n):
        f = c.lift_map(x0, g)  # (0,1) -> (0,g)
        lt = G.left_translation(g)
        expected = (np.arange(nv)[:, None] * n + lt[None, :]).ravel()
        got = np.empty(c.total.n, dtype=np.int64)
        got[np.fromiter(f.keys(), dtype=np.int64)] = np.fromiter(f.values(), dtype=np.int64)
        if not np.array_equal(got, expected):
            raise AssertionError("deck transformation is not a left multiplication")


def undirected_deck_count(c: CoveringMap, cap: int = 10**6) -> int:
    """Vertex maps of a connected total graph that commute with the projection and
    preserve, for each base edge, the multiset of unordered endpoint pairs above it."""
    T = c.total
    if components(T, "weak")[0] != 1:
        raise ParameterError("undirected deck count needs a connected total graph")
    em = c.edge_map.tolist()
    pairs: dict[int, dict] = {}
    for e, (s, t) in enumerate(T.edge_pairs()):
        key = (min(s, t), max(s, t))
        bucket = pairs.setdefault(em[e], {})
        bucket[key] = bucket.get(key, 0) + 1
    nbrs = [[] for _ in range(T.n)]
    for e, (s, t) in enumerate(T.edge_pairs()):
        nbrs[s].append((em[e], t))
        nbrs[t].append((em[e], s))
    order = []
    seen = {0}
    queue = [0]
    while queue:
        x = queue.pop(0)
        order.append(x)
        for _, y in nbrs[x]:
            if y not in seen:
                seen.add(y)
                queue.append(y)
    vm = c.vertex_map
    count = 0

    def consistent(f):
        for b, bucket in pairs.items():
            img = {}
            for (s, t), m in bucket.items():
                key = tuple(sorted((f[s], f[t])))
                img[key] = img.get(key, 0) + m
            if img != bucket:
                return False
        return True

    def search(i, f, used):
        nonlocal count
        if count > cap:
            raise CapExceeded("undirected deck search exceeded cap")
        if i == len(order):
            if consistent(f):
                count += 1
            return
        x = order[i]
        cands = None
        for b, y in nbrs[x]:
            if y in f:
                opts = {z for b2, z in nbrs[f[y]] if b2 == b}
                cands = opts if cands is None else cands & opts
        if cands is None:
            cands = set(np.flatnonzero(vm == vm[x]).tolist())
        for z in sorted(cands):
            if z in used or vm[z] != vm[x]:
                continue
            f[x] = z
            used.add(z)
            search(i + 1, f, used)
            used.discard(z)
            del f[x]

    search(0, {}, set())
    return count


def quotient_by_normal(alpha: VoltageAssignment, H) -> tuple[VoltageAssignment, CoveringMap]:
    """Push alpha to G/H; return it with the covering X(G,alpha) -> X(G/H, alpha~)."""
    G = alpha.group
    H = sorted(int(h) for h in H)
    if not G.is_normal(H):
        raise ParameterError("subgroup is not normal")
    coset = np.full(G.order, -1, dtype=np.int64)
    reps = []
    for g in range(G.order):
        if coset[g] >= 0:
            continue
        for h in H:
            coset[G.mul(g, h)] = len(reps)
        reps.append(g)
    table = [[int(coset[G.mul(a, b)]) for b in reps] for a in reps]
    Q = TableGroup(table, [G.label(r) for r in reps], identity=int(coset[G.identity]))
    beta = VoltageAssignment(alpha.graph, Q, coset[alpha.values])
    top, _ = derived_graph(alpha)
    bottom, _ = derived_graph(beta)
    n, m = G.order, Q.order
    vmap = (np.arange(top.n) // n) * m + coset[np.arange(top.n) % n]
    emap = (np.arange(top.n_edges) // n) * m + coset[np.arange(top.n_edges) % n]
    cover = CoveringMap(top, bottom, vmap, emap)
    if not cover.verify():
        raise AssertionError("quotient projection is not a covering")
    return beta, cover


def random_voltage_graph(rng: np.random.Generator, group: FiniteGroup, n_vertices: int, n_extra: int) -> VoltageAssignment:
    """A connected random multigraph (spanning path + random edges) with random voltages."""
    edges = []
    perm = rng.permutation(n_vertices)
    for a, b in zip(perm[:-1], perm[1:]):
        edges.append((int(a), int(b)) if rng.random() < 0.5 else (int(b), int(a)))
    for _ in range(n_extra):
        edges.append((int(rng.integers(n_vertices)), int(rng.integers(n_vertices))))
    X = DirectedMultigraph.from_edges(n_vertices, edges)
    values = rng.integers(group.order, size=len(edges))
    return VoltageAssignment(X, group, values)


def dump_json(obj) -> str:
    return json.dumps(obj, indent=1, sort_keys=True)
