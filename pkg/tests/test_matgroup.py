from fractions import Fraction
from math import gcd

import numpy as np
import pytest
from hypothesis import given, strategies as st
from sympy import totient

from isotower.errors import ParameterError
from isotower.matgroup import (
    CyclicGroup, GL2Mod, brute_gl2_count, congruence_subgroup, density_target, generator_density,
    gl2_group, gl2_order, gl2_order_formula, multiplicative_order, permutation_group, unit_group,
    unit_index,
)

# by enumeration of all 2x2 matrices, frozen
GL2_COUNTS = {2: 6, 3: 48, 4: 96, 8: 1536, 9: 3888, 27: 314928}


@pytest.mark.parametrize("m,count", GL2_COUNTS.items())
def test_gl2_counts(m, count):
    p = min(d for d in (2, 3) if m % d == 0)
    n = round(np.log(m) / np.log(p))
    assert brute_gl2_count(m) == count == gl2_order_formula(p, n) == gl2_order(p, n)


def _brute_unit_index(m, l):
    units = {r for r in range(m) if gcd(r, m) == 1} if m > 1 else {0}
    sub, x = set(), 1 % m
    while x not in sub:
        sub.add(x)
        x = x * l % m if m > 1 else 0
    return len(units) // len(sub)


@pytest.mark.parametrize("m,l", [(3, 2), (9, 2), (5, 2), (25, 2), (10, 3), (50, 3), (8, 5), (24, 5), (72, 5), (7, 2), (63, 2)])
def test_unit_index(m, l):
    assert unit_index(m, l) == _brute_unit_index(m, l)


@given(st.integers(2, 200), st.integers(1, 500))
def test_multiplicative_order(m, l):
    if gcd(l, m) != 1:
        with pytest.raises(ParameterError):
            multiplicative_order(l, m)
        return
    k = multiplicative_order(l, m)
    assert pow(l, k, m) == 1 % m
    assert all(pow(l, j, m) != 1 for j in range(1, k))


mats = st.builds(lambda a, b, c, d: (a, b, c, d), *(st.integers(0, 26) for _ in range(4)))


@given(mats, mats)
def test_gl2mod_arithmetic(x, y):
    m = 27
    A, B = GL2Mod(m, *(v % m for v in x)), GL2Mod(m, *(v % m for v in y))
    assert (A * B).det == A.det * B.det % m
    if gcd(A.det, m) == 1:
        assert A * A.inverse() == GL2Mod.identity(m)
        assert GL2Mod.decode(A.encode()) == A
        assert A.reduce(9) * B.reduce(9) == (A * B).reduce(9)


def test_matrix_encoding():
    A = GL2Mod.decode("1,2;3,4@9")
    assert (A.a, A.b, A.c, A.d, A.m) == (1, 2, 3, 4, 9)
    assert A.encode() == "1,2;3,4@9"
    with pytest.raises(ParameterError):
        GL2Mod.decode("3,0;0,3@9")


@pytest.mark.parametrize("G", [gl2_group(2), gl2_group(3), unit_group(9), unit_group(8), CyclicGroup(7),
                               permutation_group([(1, 2, 3, 0), (1, 0, 2, 3)])])
def test_group_axioms(G):
    assert G.check_axioms()


def test_gl2_group_translations_and_reduction():
    G = gl2_group(9)
    g = G.element(GL2Mod.make(1, 2, 3, 4, 9))
    rt, lt = G.right_translation(g), G.left_translation(g)
    for s in range(0, G.order, 97):
        assert rt[s] == G.mul(s, g) and lt[s] == G.mul(g, s)
    red = G.reduction_map(3)
    H = gl2_group(3)
    for s in range(0, G.order, 131):
        assert H.matrix(int(red[s])) == G.matrix(s).reduce(3)


@pytest.mark.parametrize("p,n,m", [(3, 1, 0), (3, 2, 0), (3, 2, 1), (2, 3, 1), (2, 3, 2), (5, 2, 1)])
def test_congruence_subgroup_orders(p, n, m):
    A = congruence_subgroup(p, n, m, "matrix")
    want = gl2_order(p, n) if m == 0 else p ** (4 * (n - m))
    assert A.order == want
    assert A.ambient.is_normal(A.members) if A.order < 200 else True
    U = congruence_subgroup(p, n, m, "unit")
    assert U.order == int(totient(p**n)) // int(totient(p**m))


def test_unit_subgroup_is_cyclic_for_odd_p():
    assert congruence_subgroup(3, 3, 1, "unit").group.is_cyclic()
    assert congruence_subgroup(5, 2, 0, "unit").group.is_cyclic()


def test_permutation_group_orders():
    assert permutation_group([(1, 2, 3, 0), (1, 0, 2, 3)]).order == 24
    assert permutation_group([(1, 2, 3, 4, 0), (4, 3, 2, 1, 0)]).order == 10
    assert permutation_group([(1, 0, 2, 3), (0, 1, 3, 2)]).order == 4


# counts over primes l <= 10^5 with an independent sympy n_order loop, frozen
DENSITY = {(3, 1): Fraction(3208, 9591), (5, 1): Fraction(3856, 9591), (3, 2): Fraction(3207, 9590)}


@pytest.mark.parametrize("key,value", DENSITY.items())
def test_generator_density(key, value, monkeypatch):
    monkeypatch.setenv("ISOTOWER_THREADS", "3")
    assert generator_density(*key, 10**5) == value
    assert abs(float(value) - float(density_target(key[0]))) < 0.02


def test_density_guards():
    with pytest.raises(ParameterError):
        generator_density(3, 5, 10**5)
