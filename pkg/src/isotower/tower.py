"""Isogeny graphs with level structure, their voltage description, and audits.

Vertices of the level-(p^n N) graph are (E, R1, R2, P, Q) with (R1, R2) a basis
of E[N] and (P, Q) a basis of E[p^n].  The level-0 graph X(N) is realized with
vertices (E, tau), tau in GL2(Z/N), where (R1, R2)^T = tau (r1, r2)^T for a
fixed basis (r1, r2) of each curve.  Every step phi contributes the matrices

    (phi s, phi t)^T   = g (s', t')^T     mod p^n_max   (the voltage)
    (phi r1, phi r2)^T = h (r1', r2')^T   mod N

so the edge (E, tau) -> (E', tau h) carries voltage g.
"""

from __future__ import annotations

import logging
from dataclasses import asdict, dataclass, field
from functools import cached_property
from itertools import product
from math import gcd, log

import numpy as np
from sympy import isprime, totient

from .curve import (
    Curve, Point, RepresentativeSet, canonical_model, curve_with_j, enumerate_representatives,
    lucas_traces, max_automorphism_order, root_log, split_behavior, supersingular_j_invariants,
    twist_classes, weil_pairing,
)
from .errors import CapExceeded, ParameterError, TheoremCheckFailure
from .field import ExtensionField, make_extension
from .isogeny import IsogenyStep, isogeny_steps
from .matgroup import (
    GL2Mod, congruence_subgroup, gl2_group, gl2_order, multiplicative_order,
    unit_group, unit_index,
)
from .voltgraph import (
    CoveringMap, DirectedMultigraph, VoltageAssignment, components, deck_transformations,
    derived_graph, factorial_exceeds, is_galois,
)

log_ = logging.getLogger(__name__)

DEFAULT_GRAPH_CAP = 6 * 10**6
DIRECT_CAP = 40_000      # vertices of a point-based level graph
DECK_ENUM_CAP = 400_000  # sheets * |total| for explicit deck enumeration


@dataclass(frozen=True)
class TowerParams:
    q: int
    l: int
    p: int
    N: int = 1
    n_max: int = 1
    k: int | None = None
    seed_curves: tuple[str, ...] = ()   # encodings "q,k|a4|a6"; empty -> supersingular seeds
    normalize: bool = True
    cap_field: int = 10**7
    cap_graph: int = DEFAULT_GRAPH_CAP

    def validate(self) -> "TowerParams":
        for name in ("q", "l", "p"):
            if not isprime(getattr(self, name)):
                raise ParameterError(f"{name} must be prime")
        if len({self.q, self.l, self.p}) < 3:
            raise ParameterError("p, q, l must be three distinct primes")
        if self.N < 1 or gcd(self.N, self.p * self.q * self.l) != 1:
            raise ParameterError("N must be a positive integer coprime to p*q*l")
        if self.q < 5:
            raise ParameterError("q must be at least 5 (short Weierstrass models)")
        if self.n_max < 0:
            raise ParameterError("n_max must be non-negative")
        if self.k is not None and self.k < 1:
            raise ParameterError("k must be positive")
        return self

    @property
    def level(self) -> int:
        return self.p**self.n_max * self.N

    def to_json(self) -> dict:
        return asdict(self)


def supersingular_degree(q: int, M: int, cap: int) -> int:
    """Smallest even k with M | q^(k/2) -+ 1, i.e. a scalar Frobenius killing E[M]."""
    k = 2
    while q**k <= cap:
        h = q ** (k // 2)
        if (h - 1) % M == 0 or (h + 1) % M == 0:
            return k
        k += 2
    raise CapExceeded(f"no even k with q^k <= {cap} makes E[{M}] rational on supersingular curves")


def supersingular_seeds(F: ExtensionField, M: int) -> list[Curve]:
    """Supersingular curves over F (one per class) with E[M] rational."""
    if F.k % 2:
        raise ParameterError("supersingular seeds need an even extension degree")
    F2 = make_extension(F.q, 2)
    out = []
    for j in supersingular_j_invariants(F.q):
        for C in twist_classes(curve_with_j(F2, j).base_change(F)):
            if C.has_full_torsion(M):
                out.append(C)
    return out


def _grid(E: Curve, basis: tuple[Point, Point], m: int) -> dict[Point, tuple[int, int]]:
    """Discrete-log table P -> (a, b) with P = a*b1 + b*b2 over E[m]."""
    b1, b2 = basis
    table = {}
    row = None
    for a in range(m):
        P = row
        for b in range(m):
            table[P] = (a, b)
            P = E.add(P, b2)
        row = E.add(row, b1)
    if len(table) != m * m:
        raise AssertionError("basis does not generate E[m]")
    return table


def _ordered_bases(E: Curve, m: int) -> list[tuple[Point, Point]]:
    """All ordered bases of E[m], found by the Weil-pairing order test."""
    if m == 1:
        return [(None, None)]
    F = E.field
    pts = E.torsion_points(m)
    out = []
    for P in pts:
        for Q in pts:
            if F.multiplicative_order(weil_pairing(E, P, Q, m)) == m:
                out.append((P, Q))
    return out


@dataclass
class TateBasisTable:
    """Per-curve bases (s_E, t_E) of E[p^n_max]; optionally <s_E, t_E> = xi for all E."""

    p: int
    n_max: int
    bases: list[tuple[Point, Point]]
    normalized: bool
    xi: int | None = None

    @classmethod
    def build(cls, curves: list[Curve], p: int, n_max: int, normalize: bool) -> "TateBasisTable":
        pe = p**n_max
        bases = [E.torsion_basis(pe).basis for E in curves]
        if pe == 1 or not curves:
            return cls(p, n_max, bases, normalize, 1 if curves else None)
        F = curves[0].field
        xi = weil_pairing(curves[0], *bases[0], pe)
        if normalize:
            fixed = []
            for E, (s, t) in zip(curves, bases):
                a = root_log(F, weil_pairing(E, s, t, pe), xi, pe)
                t = E.mul(pow(a, -1, pe), t)  # post-multiply by diag(1, 1/a)
                fixed.append((s, t))
            bases = fixed
        table = cls(p, n_max, bases, normalize, xi)
        if normalize:
            assert all(weil_pairing(E, s, t, pe) == xi for E, (s, t) in zip(curves, bases))
        return table


@dataclass
class DirectLevel:
    """The level-(p^n N) graph built from points; vertex (i, r, pq) has index
    (i * nR + r) * nPQ + pq and edge (s, r, pq) index (s * nR + r) * nPQ + pq."""

    n: int
    graph: DirectedMultigraph
    r_bases: list[list[tuple[Point, Point]]]
    pq_bases: list[list[tuple[Point, Point]]]
    pq_index: list[dict]
    phi: np.ndarray  # vertex -> derived vertex under the bijection Phi

    @property
    def nR(self) -> int:
        return len(self.r_bases[0])

    @property
    def nPQ(self) -> int:
        return len(self.pq_bases[0])


@dataclass
class ComponentReport:
    component: int
    reduction_type: str
    cm_disc: int | None
    curves: list[int]
    base_vertices: int
    counts: dict[int, int] = field(default_factory=dict)
    galois: dict[int, dict] = field(default_factory=dict)
    fit: dict | None = None

    def to_json(self) -> dict:
        d = asdict(self)
        d["counts"] = {str(k): v for k, v in self.counts.items()}
        d["galois"] = {str(k): v for k, v in self.galois.items()}
        return d


class Tower:
    """All graphs X(p^n N), n <= n_max, over the closure S' of the seed curves."""

    def __init__(self, params: TowerParams):
        self.params = params.validate()
        P = params
        if P.k is None:
            if P.seed_curves:
                raise ParameterError("explicit seed curves need an explicit k")
            k = supersingular_degree(P.q, P.l * P.level, P.cap_field)
        else:
            k = P.k
        if P.q**k > P.cap_field:
            raise CapExceeded(f"field size {P.q}^{k} exceeds cap {P.cap_field}")
        self.k = k
        self.F = F = make_extension(P.q, k, cap=P.cap_field)
        if P.seed_curves:
            seeds = [Curve.decode(s) for s in P.seed_curves]
            if any(E.field is not F for E in seeds):
                raise ParameterError("seed curves must live over F_{q^k}")
        else:
            seeds = supersingular_seeds(F, P.l * P.level)
        if not seeds:
            raise ParameterError("no seed curve has the required rational torsion")
        self._close(seeds)
        log_.info("S' has %d curves, %d steps", len(self.S), len(self.steps))

    # construction -------------------------------------------------------

    def _close(self, seeds: list[Curve]):
        P = self.params
        S = RepresentativeSet(self.F)
        for E in seeds:
            S.add(E)
        self.S = S
        self.steps: list[IsogenyStep] = []
        self.steps_of: list[list[int]] = []
        self.level_bases: list[tuple[Point, Point]] = []
        i = 0
        while i < len(S):
            E = S[i]
            if not E.has_full_torsion(P.level):
                raise ParameterError(
                    f"curve {E.encode()} in the isogeny closure lacks rational E[{P.level}]")
            pe = P.p**P.n_max
            merge = E.torsion_basis(pe).basis + E.torsion_basis(P.N).basis
            first = len(self.steps)
            self.steps.extend(isogeny_steps(i, S, P.l, merge, grow=True))
            self.steps_of.append(list(range(first, len(self.steps))))
            if len(S) > P.cap_graph:
                raise CapExceeded("isogeny closure exceeds the graph cap")
            i += 1
        curves = list(S)
        self.tate = TateBasisTable.build(curves, P.p, P.n_max, P.normalize)
        self.level_bases = [E.torsion_basis(P.N).basis for E in curves]
        pe = P.p**P.n_max
        self.p_grid = [_grid(E, b, pe) for E, b in zip(curves, self.tate.bases)]
        self.n_grid = [_grid(E, b, P.N) for E, b in zip(curves, self.level_bases)]
        self.g: list[GL2Mod] = []
        self.h: list[GL2Mod] = []
        for st in self.steps:
            s, t = self.tate.bases[st.source]
            a, b = self.p_grid[st.target][st(s)]
            c, d = self.p_grid[st.target][st(t)]
            self.g.append(GL2Mod.make(a, b, c, d, pe))
            r1, r2 = self.level_bases[st.source]
            a, b = self.n_grid[st.target][st(r1)]
            c, d = self.n_grid[st.target][st(r2)]
            self.h.append(GL2Mod.make(a, b, c, d, P.N))

    @property
    def curves(self) -> list[Curve]:
        return list(self.S)

    @cached_property
    def C_q(self) -> int:
        return max_automorphism_order(self.F)

    def voltage_det_check(self) -> list[int]:
        """Indices of steps whose voltage has det != l (empty when bases are normalized)."""
        pe = self.params.p**self.params.n_max
        return [i for i, g in enumerate(self.g) if g.det % pe != self.params.l % pe]

    # level-0 graph and voltages ------------------------------------------

    @cached_property
    def nN(self) -> int:
        return gl2_group(self.params.N).order

    @cached_property
    def base(self) -> DirectedMultigraph:
        """X(N): vertex (i, tau) -> i*|GL2(Z/N)| + tau; edge (s, tau) -> s*|GL2(Z/N)| + tau."""
        GN, nN = gl2_group(self.params.N), self.nN
        src, dst = [], []
        for s, st in enumerate(self.steps):
            src.append(st.source * nN + np.arange(nN))
            dst.append(st.target * nN + GN.right_translation(GN.element(self.h[s])))
        if not src:
            return DirectedMultigraph(len(self.S) * nN, np.zeros(0, np.int64), np.zeros(0, np.int64))
        return DirectedMultigraph(len(self.S) * nN, np.concatenate(src), np.concatenate(dst))

    @cached_property
    def base_curve(self) -> np.ndarray:
        return np.arange(self.base.n) // self.nN

    def step_matrix(self, s: int, n: int) -> GL2Mod:
        return self.g[s].reduce(self.params.p**n)

    def alpha(self, n: int) -> VoltageAssignment:
        """alpha_n: base edge (s, tau) -> g_s mod p^n, in GL2(Z/p^n)."""
        self._check_level(n)
        G = gl2_group(self.params.p**n)
        vals = np.array([G.element(self.step_matrix(s, n)) for s in range(len(self.steps))], dtype=np.int64)
        return VoltageAssignment(self.base, G, np.repeat(vals, self.nN))

    def beta(self, n: int) -> VoltageAssignment:
        """beta_n = det o alpha_n, in (Z/p^n)^x."""
        self._check_level(n)
        U = unit_group(self.params.p**n)
        vals = np.array([U.element(self.step_matrix(s, n).det) for s in range(len(self.steps))], dtype=np.int64)
        return VoltageAssignment(self.base, U, np.repeat(vals, self.nN))

    def _check_level(self, n: int):
        if not 0 <= n <= self.params.n_max:
            raise ParameterError(f"level {n} outside 0..{self.params.n_max}")

    def _check_size(self, n_vertices: int, n_edges: int):
        if max(n_vertices, n_edges) > self.params.cap_graph:
            raise CapExceeded(f"graph with {n_vertices} vertices / {n_edges} edges exceeds cap {self.params.cap_graph}")

    # derived side -----------------------------------------------------

    @cached_property
    def _derived(self) -> dict:
        return {}

    def derived(self, n: int) -> tuple[DirectedMultigraph, CoveringMap]:
        if n not in self._derived:
            order = gl2_order(self.params.p, n, brute=False) if n else 1
            self._check_size(self.base.n * order, self.base.n_edges * order)
            self._derived[n] = derived_graph(self.alpha(n))
        return self._derived[n]

    @cached_property
    def _labels(self) -> dict:
        return {}

    def component_labels(self, n: int) -> tuple[int, np.ndarray]:
        if n not in self._labels:
            self._labels[n] = components(self.derived(n)[0], "weak")
        return self._labels[n]

    # direct side ------------------------------------------------------

    @cached_property
    def _direct(self) -> dict:
        return {}

    def direct(self, n: int, cap: int = DIRECT_CAP) -> DirectLevel:
        """X(p^n N) from actual points, with the bijection to the derived graph."""
        self._check_level(n)
        if n in self._direct:
            return self._direct[n]
        P = self.params
        m = P.p**n
        nV = len(self.S) * self.nN * (gl2_order(P.p, n, brute=False) if n else 1)
        if nV > cap:
            raise CapExceeded(f"direct level graph with {nV} vertices exceeds cap {cap}")
        curves = self.curves
        r_bases = [_ordered_bases(E, P.N) for E in curves]
        pq_bases = [_ordered_bases(E, m) for E in curves]
        nR, nPQ = len(r_bases[0]), len(pq_bases[0])
        if any(len(b) != nR for b in r_bases) or any(len(b) != nPQ for b in pq_bases):
            raise AssertionError("basis counts differ between curves")
        r_index = [{b: j for j, b in enumerate(bs)} for bs in r_bases]
        pq_index = [{b: j for j, b in enumerate(bs)} for bs in pq_bases]
        src, dst = [], []
        for s, st in enumerate(self.steps):
            i, t = st.source, st.target
            img: dict[Point, Point] = {}

            def image(X):
                if X not in img:
                    img[X] = st(X)
                return img[X]

            rmap = np.array([r_index[t][(image(a), image(b))] for a, b in r_bases[i]], dtype=np.int64)
            pmap = np.array([pq_index[t][(image(a), image(b))] for a, b in pq_bases[i]], dtype=np.int64)
            src.append(i * nR * nPQ + np.arange(nR * nPQ))
            dst.append((t * nR + rmap[:, None]) * nPQ + pmap[None, :])
        graph = DirectedMultigraph(len(curves) * nR * nPQ,
                                   np.concatenate(src) if src else np.zeros(0, np.int64),
                                   np.concatenate([d.ravel() for d in dst]) if dst else np.zeros(0, np.int64))
        phi = self._bijection(n, r_bases, pq_bases)
        level = DirectLevel(n, graph, r_bases, pq_bases, pq_index, phi)
        self._direct[n] = level
        return level

    def _sigma(self, i: int, pair: tuple[Point, Point], n: int) -> GL2Mod:
        """The unique sigma with (P, Q)^T = sigma (sbar, tbar)^T."""
        P = self.params
        d = P.p ** (P.n_max - n)
        entries = []
        for X in pair:
            a, b = self.p_grid[i][X]
            if a % d or b % d:
                raise AssertionError("point is not p^n-torsion")
            entries += [a // d, b // d]
        return GL2Mod.make(*entries, P.p**n)

    def _tau(self, i: int, pair: tuple[Point, Point]) -> GL2Mod:
        entries = []
        for X in pair:
            entries += list(self.n_grid[i][X])
        return GL2Mod.make(*entries, self.params.N)

    def _bijection(self, n, r_bases, pq_bases) -> np.ndarray:
        G, GN = gl2_group(self.params.p**n), gl2_group(self.params.N)
        nG = G.order
        out = []
        for i in range(len(r_bases)):
            taus = np.array([GN.element(self._tau(i, b)) for b in r_bases[i]], dtype=np.int64)
            sigmas = np.array([G.element(self._sigma(i, b, n)) for b in pq_bases[i]], dtype=np.int64)
            out.append(((i * self.nN + taus[:, None]) * nG + sigmas[None, :]).ravel())
        return np.concatenate(out)

    def derived_vs_direct(self, n: int, cap: int = DIRECT_CAP) -> dict:
        """Check that the bijection (E,R,P,Q) -> ((E,tau), sigma) is a graph isomorphism."""
        D = self.direct(n, cap)
        total, _ = self.derived(n)
        phi = D.phi
        nG = total.n // self.base.n
        report = {"n": n, "vertices": int(D.graph.n), "edges": int(D.graph.n_edges),
                  "derived_vertices": int(total.n), "derived_edges": int(total.n_edges)}
        ok = D.graph.n == total.n and D.graph.n_edges == total.n_edges
        ok = ok and len(np.unique(phi)) == len(phi)
        if ok:
            # direct edge (s, r, pq) <-> derived edge ((s, tau(r)), sigma(pq))
            nR, nPQ = D.nR, D.nPQ
            e = np.arange(D.graph.n_edges)
            s, rest = e // (nR * nPQ), e % (nR * nPQ)
            src_v = phi[D.graph.src]
            tau = (src_v // nG) % self.nN
            sigma = src_v % nG
            deid = (s * self.nN + tau) * nG + sigma
            ok = (np.array_equal(total.src[deid], src_v)
                  and np.array_equal(total.dst[deid], phi[D.graph.dst])
                  and len(np.unique(deid)) == len(deid))
            del rest
        report["isomorphic"] = bool(ok)
        return report

    # coverings ----------------------------------------------------------

    def chain_map(self, n: int) -> CoveringMap:
        """Derived X_n -> X_{n-1}: ((b), sigma) -> ((b), sigma mod p^{n-1})."""
        top, _ = self.derived(n)
        bottom, _ = self.derived(n - 1)
        G = gl2_group(self.params.p**n)
        red = G.reduction_map(self.params.p ** (n - 1))
        nG, nH = G.order, gl2_group(self.params.p ** (n - 1)).order
        v = np.arange(top.n)
        e = np.arange(top.n_edges)
        return CoveringMap(top, bottom, (v // nG) * nH + red[v % nG], (e // nG) * nH + red[e % nG])

    def direct_chain_map(self, n: int) -> CoveringMap:
        """Direct X_n -> X_{n-1}: (E, R, P, Q) -> (E, R, pP, pQ)."""
        top, low = self.direct(n), self.direct(n - 1)
        p = self.params.p
        curves = self.curves
        nR = top.nR
        pmaps = []
        for i, E in enumerate(curves):
            pmaps.append(np.array([low.pq_index[i][(E.mul(p, a), E.mul(p, b))] for a, b in top.pq_bases[i]],
                                  dtype=np.int64))
        v = np.arange(top.graph.n)
        i, r, pq = v // (nR * top.nPQ), (v // top.nPQ) % nR, v % top.nPQ
        pm = np.stack(pmaps)
        vmap = (i * nR + r) * low.nPQ + pm[i, pq]
        e = np.arange(top.graph.n_edges)
        s, r_e, pq_e = e // (nR * top.nPQ), (e // top.nPQ) % nR, e % top.nPQ
        src_curve = np.array([st.source for st in self.steps], dtype=np.int64)[s]
        emap = (s * nR + r_e) * low.nPQ + pm[src_curve, pq_e]
        return CoveringMap(top.graph, low.graph, vmap, emap)

    def covering_chain(self, direct: bool = False) -> list[dict]:
        out = []
        p = self.params.p
        for n in range(1, self.params.n_max + 1):
            c = self.direct_chain_map(n) if direct else self.chain_map(n)
            expected = p**4 if n >= 2 else gl2_order(p, 1)
            out.append({"n": n, "covering": bool(c.verify()), "sheets": c.sheets,
                        "expected_sheets": expected, "direct": direct})
        return out

    # components ---------------------------------------------------------

    @cached_property
    def base_components(self) -> tuple[int, np.ndarray]:
        return components(self.base, "weak")

    def is_supersingular(self, i: int) -> bool:
        return self.S[i].is_supersingular

    def supersingular_count(self, n: int) -> int:
        """Components of X^ss(p^n N): derived components over supersingular base vertices."""
        _, labels = self.component_labels(n)
        nG = self.derived(n)[0].n // self.base.n
        ss = np.array([self.is_supersingular(i) for i in range(len(self.S))])[self.base_curve]
        verts = (np.flatnonzero(ss)[:, None] * nG + np.arange(nG)[None, :]).ravel()
        return int(len(np.unique(labels[verts])))

    def classify_components(self, n: int | None = None) -> list[ComponentReport]:
        n = self.params.n_max if n is None else n
        count0, lab0 = self.base_components
        reports = []
        for c in range(count0):
            verts = np.flatnonzero(lab0 == c)
            curve_ids = sorted(set(self.base_curve[verts].tolist()))
            fd = [self.S[i].frobenius_data() for i in curve_ids]
            kinds = {f.supersingular for f in fd}
            if len(kinds) != 1:
                raise TheoremCheckFailure("reduction type varies on a component")
            ss = kinds.pop()
            discs = {f.cm_disc for f in fd}
            rep = ComponentReport(c, "supersingular" if ss else "ordinary",
                                  None if ss else discs.pop(), curve_ids, len(verts))
            for m in range(n + 1):
                _, labels = self.component_labels(m)
                nG = self.derived(m)[0].n // self.base.n
                fiber = (verts[:, None] * nG + np.arange(nG)[None, :]).ravel()
                rep.counts[m] = int(len(np.unique(labels[fiber])))
            if not ss:
                rep.fit = self.growth_fit(rep)
            reports.append(rep)
        return reports

    def growth_fit(self, rep: ComponentReport) -> dict:
        """Fit component counts against c p^{2(n-1)} (split) or c p^{3(n-1)}."""
        p, l = self.params.p, self.params.l
        behavior = split_behavior(rep.cm_disc, l)
        predicted = 2 if behavior == "split" else 3
        levels = sorted(m for m in rep.counts if m >= 1)
        fit = {"split_behavior": behavior, "predicted_exponent": predicted, "ratios": {}}
        if len(levels) < 2:
            fit.update(status="level too small to fit", onset=None)
            return fit
        observed = {}
        for a, b in zip(levels, levels[1:]):
            r = rep.counts[b] / rep.counts[a]
            e = round(log(r, p)) if r > 0 else None
            fit["ratios"][f"{b}/{a}"] = r
            observed[b] = e if e is not None and p**e == r else None
        top = levels[-1]
        cls = observed[top]
        fit["observed_exponent"] = cls
        fit["onset"] = None
        if cls == predicted:
            onset = top - 1
            for b in reversed(levels[1:-1]):
                if observed[b] != predicted:
                    break
                onset = b - 1
            fit["onset"] = onset
            fit["c"] = rep.counts[top] // p ** (predicted * (top - 1))
            fit["c_bound_ok"] = fit["c"] >= (p + 1) * p
            fit["status"] = "onset reached"
        else:
            fit["status"] = "onset not reached"
        return fit

    def thm41(self, n: int) -> dict:
        """Theorem on supersingular components: count equals the unit-group index."""
        P = self.params
        got = self.supersingular_count(n)
        want = unit_index(P.p**n * P.N, P.l)
        return {"n": n, "components": got, "unit_index": want, "pass": got == want}

    # Galois audits -------------------------------------------------------

    def restricted_alpha(self, component: int, n: int) -> VoltageAssignment:
        _, lab0 = self.base_components
        verts = np.flatnonzero(lab0 == component)
        sub, new = self.base.induced(verts)
        keep = (new[self.base.src] >= 0) & (new[self.base.dst] >= 0)
        a = self.alpha(n)
        return VoltageAssignment(sub, a.group, a.values[keep])

    def galois_audit(self, component: int, n: int, enumerate_deck: bool | None = None) -> dict:
        """Galois verdict for the cover X_n / X of one level-0 component."""
        alpha = self.restricted_alpha(component, n)
        total, cover = derived_graph(alpha)
        count, _ = components(total, "weak")
        sheets = alpha.group.order
        out = {"component": component, "n": n, "sheets": sheets, "components": count}
        if n == 0:
            out.update(galois=True, certificate="trivial covering", deck_order=1)
            return out
        if factorial_exceeds(count, sheets):
            out.update(galois=False, certificate="d! > |G| with d components")
            return out
        if enumerate_deck is None:
            enumerate_deck = sheets * total.n <= DECK_ENUM_CAP
        if enumerate_deck:
            verdict = is_galois(cover, shortcut=False)
            out.update(galois=verdict.galois, certificate=verdict.reason, deck_order=verdict.deck_order)
            if verdict.galois and count == 1:
                decks = deck_transformations(cover, cap=sheets)
                out["deck_enumerated"] = len(decks)
                out["fiber_transitive"] = sorted(int(d[0]) for d in decks) == cover.fiber(0).tolist()
        elif count == 1:
            out.update(galois=True, certificate="connected derived graph: deck group is G by left multiplication",
                       deck_order=sheets)
        else:
            out.update(galois=None, certificate="undecided at desk scale")
        return out

    def stabilization_level(self, counts: dict[int, int], multi: dict[int, bool]) -> int | None:
        top = max(counts)
        for m in sorted(counts):
            if all(counts[j] == counts[top] for j in range(m, top + 1)) and not multi[m]:
                return m if m < top else None
        return None

    def cor45_audit(self, n: int | None = None) -> dict:
        """Deck(Z_n / Z_m) = G_{n,m} for supersingular components past stabilization."""
        P = self.params
        n = P.n_max if n is None else n
        ss_comps = [c for c in range(self.base_components[0])
                    if self.is_supersingular(int(self.base_curve[np.flatnonzero(self.base_components[1] == c)[0]]))]
        if not ss_comps:
            return {"status": "undecided", "reason": "no supersingular component"}
        comp = ss_comps[0]
        counts, multi = {}, {}
        for m in range(n + 1):
            alpha = self.restricted_alpha(comp, m)
            total, _ = derived_graph(alpha)
            counts[m] = components(total, "weak")[0]
            multi[m] = total.has_multiple_edges()
        m0 = self.stabilization_level(counts, multi)
        out = {"component": comp, "counts": counts, "multiple_edges": multi, "m0": m0}
        if m0 is None:
            out.update(status="undecided", reason="stabilization not reached within n_max")
            return out
        out.update(self._congruence_deck(comp, n, m0))
        out["status"] = "pass" if out["pass"] else "fail"
        return out

    def _congruence_deck(self, comp: int, n: int, m: int) -> dict:
        """Deck group of a component of X_n over its image in X_m versus G_{n,m}."""
        p = self.params.p
        top_alpha = self.restricted_alpha(comp, n)
        top, _ = derived_graph(top_alpha)
        low, _ = derived_graph(self.restricted_alpha(comp, m))
        G = top_alpha.group
        H = gl2_group(p**m)
        red = G.reduction_map(p**m)
        nG, nH = G.order, H.order
        vm = (np.arange(top.n) // nG) * nH + red[np.arange(top.n) % nG]
        em = (np.arange(top.n_edges) // nG) * nH + red[np.arange(top.n_edges) % nG]
        full = CoveringMap(top, low, vm, em)
        _, labels = components(top, "weak")
        Zn = np.flatnonzero(labels == labels[G.identity])
        c = full.restrict(Zn)
        sub = congruence_subgroup(p, n, m, "matrix")
        fiber = c.fiber(int(c.vertex_map[0]))
        # left multiplication by g in G_{n,m}, read in the numbering of Z_n
        pos = np.full(top.n, -1, dtype=np.int64)
        pos[Zn] = np.arange(len(Zn))
        acts = 0
        for g in sub.members:
            img = pos[(Zn // nG) * nG + G.left_translation(g)[Zn % nG]]
            if (img >= 0).all() and c.is_deck(img):
                acts += 1
        # deck groups of connected covers act freely, so |Deck| <= |fiber|
        covering = c.verify()
        ok = covering and acts == len(fiber) == sub.order
        return {"n": n, "m": m, "covering": covering, "sheets": len(fiber), "deck_order": acts if ok else None,
                "G_nm_order": sub.order, "G_nm_acting": acts, "pass": ok}

    # Y graphs -----------------------------------------------------------

    def _xi(self, n: int) -> int:
        if not self.tate.normalized:
            raise ParameterError("Y-graphs need a normalized Tate basis table")
        P = self.params
        return self.F.pow(self.tate.xi, P.p ** (P.n_max - n))

    def y_derived(self, n: int) -> tuple[DirectedMultigraph, CoveringMap]:
        b = self.beta(n)
        self._check_size(self.base.n * b.group.order, self.base.n_edges * b.group.order)
        return derived_graph(b)

    def y_direct(self, n: int, rule: str = "min") -> DirectedMultigraph:
        """Y(p^n N) via Weil pairings of images of a fixed pre-image per vertex."""
        P = self.params
        m = P.p**n
        U = unit_group(m)
        xi = self._xi(n)
        curves = self.curves
        for E, (s, t) in zip(curves, self.tate.bases):
            d = P.p ** (P.n_max - n)
            if weil_pairing(E, E.mul(d, s), E.mul(d, t), m) != xi:
                raise AssertionError("truncated bases do not pair to xi_n")
        pre = _preimages(m, rule)
        GN = gl2_group(P.N)
        nN, nU = self.nN, U.order
        src, dst = [], []
        for sid, st in enumerate(self.steps):
            i, t = st.source, st.target
            s_bar, t_bar = (curves[i].mul(P.p ** (P.n_max - n), X) for X in self.tate.bases[i])
            E, Et = curves[i], curves[t]
            target_a = np.empty(nU, dtype=np.int64)
            for ai, a in enumerate(U.elements):
                sg = pre[a]
                Pp = E.add(E.mul(sg.a, s_bar), E.mul(sg.b, t_bar))
                Qp = E.add(E.mul(sg.c, s_bar), E.mul(sg.d, t_bar))
                z = weil_pairing(Et, st(Pp), st(Qp), m) if m > 1 else 1
                target_a[ai] = U.element(root_log(self.F, z, xi, m) if m > 1 else 0)
            rt = GN.right_translation(GN.element(self.h[sid]))
            tau = np.arange(nN)
            src.append(((i * nN + tau)[:, None] * nU + np.arange(nU)[None, :]).ravel())
            dst.append(((t * nN + rt)[:, None] * nU + target_a[None, :]).ravel())
        nV = self.base.n * nU
        if not src:
            return DirectedMultigraph(nV, np.zeros(0, np.int64), np.zeros(0, np.int64))
        return DirectedMultigraph(nV, np.concatenate(src), np.concatenate(dst))

    def prop53(self, n: int) -> dict:
        """Direct Y-graph (two pre-image rules) against the beta_n derived graph."""
        Yb, _ = self.y_derived(n)
        out = {"n": n, "N": self.params.N, "C_q": self.C_q, "N_exceeds_C_q": self.params.N > self.C_q}
        for rule in ("min", "max"):
            Ya = self.y_direct(n, rule)
            out[f"isomorphic_{rule}"] = bool(np.array_equal(Ya.src, Yb.src) and np.array_equal(Ya.dst, Yb.dst))
        out["multiple_edges"] = bool(Yb.has_multiple_edges())
        pe = self.params.p**n
        out["beta_constant_l"] = all(self.step_matrix(s, n).det == self.params.l % pe for s in range(len(self.steps)))
        out["pass"] = out["isomorphic_min"] and out["isomorphic_max"] and (
            not out["N_exceeds_C_q"] or not out["multiple_edges"])
        return out

    def y_counts(self) -> dict[int, int]:
        return {n: components(self.y_derived(n)[0], "weak")[0] for n in range(self.params.n_max + 1)}

    def thm55(self) -> dict:
        """Per level-0 component, Y-components above it are at most |(Z/p^n)^x / <l^{2u}>|."""
        P = self.params
        u = multiplicative_order(P.l, P.N) if P.N > 1 else 1
        count0, lab0 = self.base_components
        rows = []
        for n in range(P.n_max + 1):
            m = P.p**n
            units = int(totient(m))
            bound = units // (multiplicative_order(pow(P.l, 2 * u, m), m) if m > 1 else 1)
            Y, _ = self.y_derived(n)
            _, labels = components(Y, "weak")
            nU = Y.n // self.base.n
            worst = 0
            for c in range(count0):
                verts = np.flatnonzero(lab0 == c)
                fiber = (verts[:, None] * nU + np.arange(nU)[None, :]).ravel()
                worst = max(worst, len(np.unique(labels[fiber])))
            rows.append({"n": n, "max_components_over_base_component": worst, "bound": bound,
                         "pass": worst <= bound})
        return {"levels": rows, "pass": all(r["pass"] for r in rows)}

    def y_tower_audit(self, n: int | None = None, m: int | None = None) -> dict:
        """Deck(Y_n / Y_m) for a component, against the cyclic group G_{n,m} of units."""
        P = self.params
        counts = self.y_counts()
        multi = {j: self.y_derived(j)[0].has_multiple_edges() for j in counts}
        m0 = None
        top = max(counts)
        for j in sorted(counts):
            if all(counts[i] == counts[top] for i in range(j, top + 1)):
                m0 = j
                break
        out = {"counts": counts, "multiple_edges": multi, "m0": m0, "N": P.N, "C_q": self.C_q}
        n = P.n_max if n is None else n
        m = m0 if m is None else m
        if m0 is None or m is None or m >= n:
            out.update(status="undecided", reason="stabilization not reached below n_max")
            return out
        if m < m0:
            raise ParameterError("m must be at least the stabilization level")
        top_g, _ = self.y_derived(n)
        low_g, _ = self.y_derived(m)
        Un, Um = unit_group(P.p**n), unit_group(P.p**m)
        red = np.array([Um.element(r) for r in Un.elements], dtype=np.int64)
        nU, nL = Un.order, Um.order
        v, e = np.arange(top_g.n), np.arange(top_g.n_edges)
        full = CoveringMap(top_g, low_g, (v // nU) * nL + red[v % nU], (e // nU) * nL + red[e % nU])
        if not full.verify():
            raise TheoremCheckFailure("Y_n -> Y_m is not a covering")
        _, labels = components(top_g, "weak")
        Zn = np.flatnonzero(labels == labels[Un.identity])
        c = full.restrict(Zn)
        fiber = c.fiber(int(c.vertex_map[0]))
        lifts = [c.lift_map(0, int(y)) for y in fiber]
        perms = []
        for f in lifts:
            if f is not None:
                perm = np.empty(c.total.n, dtype=np.int64)
                perm[list(f.keys())] = list(f.values())
                perms.append(perm)
        sub = congruence_subgroup(P.p, n, m, "unit")
        Zset = {int(x): j for j, x in enumerate(Zn)}
        acting = 0
        for g in sub.members:
            img = (Zn // nU) * nU + Un.right_translation(g)[Zn % nU]
            if all(int(x) in Zset for x in img):
                perm = np.array([Zset[int(x)] for x in img])
                if any(np.array_equal(perm, q) for q in perms):
                    acting += 1
        orders = [_perm_order(q) for q in perms]
        want = int(totient(P.p**n)) // int(totient(P.p**m))  # p^(n-m) once m >= 1
        out.update(n=n, m=m, sheets=len(fiber), deck_order=len(perms), G_nm_order=sub.order,
                   G_nm_acting=acting, cyclic=max(orders, default=0) == len(perms),
                   galois=len(perms) == len(fiber))
        out["pass"] = (out["galois"] and len(perms) == want == sub.order == acting and out["cyclic"])
        out["hypothesis_N_exceeds_C_q"] = P.N > self.C_q
        if out["pass"]:
            out["status"] = "pass"
        else:
            out["status"] = "fail" if P.N > self.C_q else "undecided"
        return out


def _perm_order(perm: np.ndarray) -> int:
    k, cur = 1, perm.copy()
    ident = np.arange(len(perm))
    while not np.array_equal(cur, ident):
        cur = perm[cur]
        k += 1
    return k


def _preimages(m: int, rule: str) -> dict[int, GL2Mod]:
    """For each unit a mod m, the lexicographically smallest (or largest) matrix with det a."""
    if rule not in ("min", "max"):
        raise ParameterError(f"unknown pre-image rule {rule!r}")
    rng = range(m) if rule == "min" else range(m - 1, -1, -1)
    out: dict[int, GL2Mod] = {}
    for a, b, c, d in product(rng, repeat=4):
        det = (a * d - b * c) % m
        if gcd(det, m) == 1 and det not in out:
            out[det] = GL2Mod(m, a, b, c, d)
        if len(out) == int(totient(m)):
            break
    if m == 1:
        out = {0: GL2Mod(1, 0, 0, 0, 0)}
    return out


# ordinary instances ---------------------------------------------------------

def ordinary_candidates(q: int, k: int, level: int, cap: int = 10**7) -> list[Curve]:
    """Ordinary curves defined over F_q whose base change to F_{q^k} has rational E[level]."""
    F = make_extension(q, k, cap=cap)
    out, seen = [], set()
    for E in enumerate_representatives(make_extension(q, 1)):
        if E.is_supersingular:
            continue
        t = lucas_traces(E.trace, q, k)[k]
        if (q**k + 1 - t) % (level * level) or (q**k - 1) % level:
            continue
        C = E.base_change(F)
        key = canonical_model(F, C.a4, C.a6)[:2]
        if key not in seen and C.has_full_torsion(level):
            seen.add(key)
            out.append(Curve(F, *key))
    return out


def find_ordinary_instance(l: int, p: int, N: int = 1, n_max: int = 2,
                           qs=(5, 7, 11, 13), max_field: int = 3 * 10**5,
                           want_onset: bool = True) -> list[dict]:
    """Search small fields for ordinary components whose growth fit reaches its onset."""
    found = []
    level = p**n_max * N
    for q in qs:
        if q in (l, p) or gcd(N, q) != 1:
            continue
        k = 1
        while q**k <= max_field:
            if (q**k - 1) % level == 0:
                for E in ordinary_candidates(q, k, level):
                    params = TowerParams(q, l, p, N, n_max, k, (E.encode(),))
                    try:
                        T = Tower(params)
                    except ParameterError:
                        continue
                    rep = next(r for r in T.classify_components() if r.reduction_type == "ordinary")
                    found.append({"params": params, "report": rep})
                    if not want_onset or rep.fit.get("status") == "onset reached":
                        return found
            k += 1
    return found
