from collections import Counter
from math import gcd

import numpy as np
import pytest
from hypothesis import given, strategies as st

from isotower.errors import ParameterError
from isotower.voltgraph import DirectedMultigraph
from isotower.volcano import (
    TectonicParams, directed_cycle, double_intertwine, gen_tectonic_crater, gen_tectonic_volcano,
    gen_volcano, quotient_of, recognize, recognize_crater, recognize_double_intertwinement,
    recognize_tectonic_crater, recognize_tectonic_volcano, recognize_volcano,
)


def labelled_edges(X):
    return Counter((X.vertex_labels[a], X.vertex_labels[b]) for a, b in X.edge_pairs())


# drawn examples, frozen as labelled edge multisets

def test_intertwine_single_edge():
    Z = DirectedMultigraph.from_edges(2, [(0, 1)], vertex_labels=["v1", "v2"])
    W = double_intertwine(Z)
    assert labelled_edges(W) == Counter([("+v1", "+v2"), ("-v1", "-v2"), ("+v1", "-v2"), ("-v1", "+v2")])


def test_intertwine_four_cycle():
    W = double_intertwine(directed_cycle(4))
    want = []
    for i in range(1, 5):
        j = i % 4 + 1
        want += [(f"+v{i}", f"+v{j}"), (f"-v{i}", f"-v{j}"), (f"+v{i}", f"-v{j}"), (f"-v{i}", f"+v{j}")]
    assert W.n == 8 and W.n_edges == 16
    assert labelled_edges(W) == Counter(want)
    assert ("-v4", "+v1") in labelled_edges(W) and ("-v2", "+v3") in labelled_edges(W)


def test_tectonic_crater_5112():
    X = gen_tectonic_crater(TectonicParams(5, 1, 1, 2))
    colors = X.edge_attrs["color"]
    blue = {(X.vertex_labels[a], X.vertex_labels[b]) for (a, b), c in zip(X.edge_pairs(), colors) if c == "blue"}
    green = {(X.vertex_labels[a], X.vertex_labels[b]) for (a, b), c in zip(X.edge_pairs(), colors) if c == "green"}
    assert blue == {(f"v{i}", f"v{i % 5 + 1}") for i in range(1, 6)}
    assert green == {("v1", "v4"), ("v4", "v2"), ("v2", "v5"), ("v5", "v3"), ("v3", "v1")}
    v = recognize_tectonic_crater(X)
    assert v.ok and v.params == {"r": 5, "s": 1, "t": 1, "c": 2}


# generator / recognizer roundtrips

@st.composite
def tectonic(draw, bound=4):
    r, s, t = (draw(st.integers(1, bound)) for _ in range(3))
    c = draw(st.sampled_from([c for c in range(1, r + 1) if gcd(c, r) == 1]))
    return TectonicParams(r, s, t, c)


@given(tectonic())
def test_tectonic_crater_roundtrip(p):
    X = gen_tectonic_crater(p)
    assert X.n == p.n_vertices
    assert (X.out_degree == 2).all() and (X.in_degree == 2).all()
    v = recognize_tectonic_crater(X)
    assert v.ok and tuple(v.params.values()) == p.as_tuple()


@given(tectonic(3))
def test_uncolored_search_finds_params(p):
    X = gen_tectonic_crater(p)
    Y = DirectedMultigraph.from_edges(X.n, X.edge_pairs())
    v = recognize_tectonic_crater(Y)
    assert v.ok
    assert list(p.as_tuple()) in v.witness["alternatives"]


def test_uncolored_alternatives_include_color_swap():
    X = gen_tectonic_crater(TectonicParams(5, 1, 1, 2))
    v = recognize_tectonic_crater(X, use_colors=False)
    assert v.ok and [5, 1, 1, 3] in v.witness["alternatives"] and [5, 1, 1, 2] in v.witness["alternatives"]


@given(st.integers(2, 3), st.integers(1, 5), st.integers(0, 3))
def test_volcano_cycle_roundtrip(l, L, D):
    V = gen_volcano(l, ("cycle", L), D)
    v = recognize_volcano(V.graph, D, l)
    assert v.ok, v.reasons
    assert v.witness["depth"] == V.depth.tolist()
    if D:
        assert V.counts() == [L] + [L * l**i for i in range(1, D + 1)]


@given(st.integers(2, 3), st.integers(0, 4), st.integers(0, 3))
def test_volcano_isolated_roundtrip(l, n, D):
    V = gen_volcano(l, ("isolated", n), D)
    v = recognize_volcano(V.graph, D, l)
    assert v.ok, v.reasons
    assert v.params["crater"] == "isolated"
    if D:
        assert V.counts()[1] == n * (l + 1)


@given(st.integers(2, 3), tectonic(3), st.integers(0, 2))
def test_tectonic_volcano_roundtrip(l, p, D):
    V = gen_tectonic_volcano(l, p, D)
    v = recognize_tectonic_volcano(V.graph, D, l)
    assert v.ok, v.reasons
    assert v.witness["depth"] == V.depth.tolist()
    inner = V.depth < D
    assert (V.graph.out_degree[inner] == l + 1).all() if D else True


@given(tectonic(3))
def test_intertwinement_roundtrip(p):
    Z = gen_tectonic_crater(p)
    W = double_intertwine(Z)
    v = recognize_double_intertwinement(W)
    assert v.ok
    Q = quotient_of(v)
    assert Q.n == Z.n and Q.n_edges == Z.n_edges
    assert recognize_tectonic_crater(Q).params == recognize_tectonic_crater(Z).params


def test_intertwined_volcano_quotient_is_volcano():
    V = gen_volcano(2, ("cycle", 3), 2)
    v = recognize_double_intertwinement(double_intertwine(V.graph))
    assert v.ok and recognize_volcano(quotient_of(v), 2, 2).ok


# negatives

def test_deleted_edge_rejected():
    V = gen_volcano(2, ("cycle", 3), 2)
    pairs = V.graph.edge_pairs()
    drop = next(i for i, (a, b) in enumerate(pairs) if V.depth[a] == 0 and V.depth[b] == 1)
    X = DirectedMultigraph.from_edges(V.graph.n, pairs[:drop] + pairs[drop + 1:])
    v = recognize_volcano(X, 2, 2)
    assert v.ok is False and any("out-degree" in r for r in v.reasons)


def test_depth_skipping_edge_rejected():
    V = gen_volcano(2, ("cycle", 2), 2)
    pairs = V.graph.edge_pairs()
    root = 0
    deep = int(np.flatnonzero(V.depth == 2)[0])
    X = DirectedMultigraph.from_edges(V.graph.n, pairs + [(deep, root)])
    v = recognize_volcano(X, 2, 2)
    assert v.ok is False and v.reasons


def test_crater_cases():
    assert recognize_crater(directed_cycle(5)).ok
    assert recognize_crater(DirectedMultigraph.from_edges(3, [])).params["kind"] == "isolated"
    two = DirectedMultigraph.from_edges(4, [(0, 1), (1, 0), (2, 3), (3, 2)])
    assert recognize_crater(two).ok is False
    assert recognize_crater(DirectedMultigraph.from_edges(2, [(0, 1)])).ok is False


def test_non_intertwinement():
    v = recognize_double_intertwinement(directed_cycle(3))
    assert v.ok is False and "twin" in v.reasons[0]


def test_non_tectonic():
    # out-degree 2 everywhere but in-degree uneven
    X = DirectedMultigraph.from_edges(3, [(0, 1), (0, 1), (1, 0), (1, 0), (2, 0), (2, 1)])
    assert recognize_tectonic_crater(X).ok is False
    assert recognize_tectonic_crater(DirectedMultigraph.from_edges(0, [])).ok is False


def test_empty_graph():
    E = DirectedMultigraph.from_edges(0, [])
    assert recognize_volcano(E, 2).ok
    assert gen_volcano(2, ("isolated", 0), 3).graph.n == 0


@pytest.mark.parametrize("text", ["4,1,1,2", "1,2,3", "a,b,c,d", "0,1,1,1"])
def test_tectonic_params_errors(text):
    with pytest.raises(ParameterError):
        TectonicParams.parse(text).validate()


def test_canonical_c():
    assert TectonicParams(5, 1, 1, 7).canonical().c == 2
    assert TectonicParams(1, 2, 2, 0).canonical().c == 1


def test_dispatch():
    V = gen_volcano(2, ("cycle", 2), 1)
    assert recognize(V.graph, "volcano(1)").ok
    with pytest.raises(ParameterError):
        recognize(V.graph, "volcano")
    with pytest.raises(ParameterError):
        recognize(V.graph, "mountain")
    with pytest.raises(ParameterError):
        gen_volcano(1, ("cycle", 2), 1)
