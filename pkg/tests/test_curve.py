import itertools

import pytest
from hypothesis import given, strategies as st

from isotower.curve import (
    Curve, canonical_model, curve_with_j, enumerate_representatives, isomorphisms, lucas_traces,
    max_automorphism_order, split_behavior, supersingular_j_invariants, torsion_field_degree,
    twist_classes, weil_pairing, weil_pairing_naive,
)
from isotower.errors import ParameterError
from isotower.field import make_extension

# point counts from an independent Legendre-symbol loop, frozen
POINT_COUNTS = {(5, 1, 1): 9, (7, 1, 3): 6, (11, 2, 7): 7, (13, 0, 1): 12, (263, 2, 3): 270, (79, 1, 1): 86}

# F_q-rational supersingular j-invariants, from trace-zero curves over F_q, frozen
SS_J = {5: [0], 7: [6], 11: [0, 1], 13: [5], 17: [0, 8], 19: [7, 18], 23: [0, 3, 19], 29: [0, 2, 25]}


@pytest.fixture(scope="module")
def E25():
    """y^2 = x^3 + 1 over F_25: supersingular with E = Z/6 x Z/6."""
    return Curve(make_extension(5, 2), 0, 1)


@pytest.mark.parametrize("key,count", POINT_COUNTS.items())
def test_point_counts(key, count):
    p, a, b = key
    E = Curve(make_extension(p, 1), a, b)
    assert E.order == count == len(E.points())


@pytest.mark.parametrize("p,a,b", [(5, 1, 1), (7, 1, 3), (11, 2, 7), (13, 0, 1)])
def test_base_change_counts_follow_frobenius(p, a, b):
    E = Curve(make_extension(p, 1), a, b)
    for k in (2, 3):
        t = lucas_traces(E.trace, p, k)[k]
        assert E.base_change(make_extension(p, k)).order == p**k + 1 - t


@pytest.mark.parametrize("q", sorted(SS_J))
def test_supersingular_j_over_prime_field(q):
    assert [j for j in supersingular_j_invariants(q) if j < q] == SS_J[q]


def test_supersingular_count_matches_mass_formula():
    # number of supersingular j over F_{q^2}: floor(q/12) + {0,1,1,2}[q mod 12 class]
    for q in (5, 7, 11, 13, 17, 19, 23, 29, 31, 37):
        extra = {1: 0, 5: 1, 7: 1, 11: 2}[q % 12]
        assert len(supersingular_j_invariants(q)) == q // 12 + extra


@given(st.data())
def test_group_law(E25, data):
    pts = E25.points()
    P, Q, R = (data.draw(st.sampled_from(pts)) for _ in range(3))
    assert E25.add(P, Q) == E25.add(Q, P)
    assert E25.add(P, E25.add(Q, R)) == E25.add(E25.add(P, Q), R)
    assert E25.add(P, None) == P
    assert E25.add(P, E25.neg(P)) is None
    assert E25.is_on_curve(E25.add(P, Q))
    assert E25.mul(E25.order, P) is None


def test_point_encoding(E25):
    for P in E25.points()[:10]:
        assert E25.decode_point(E25.encode_point(P)) == P
    assert E25.encode_point(None) == "inf"
    with pytest.raises(ParameterError):
        E25.decode_point("1;1")


def test_curve_encoding_roundtrip():
    E = Curve.decode("5,2|1,1|0,3")
    assert E.encode() == "5,2|1,1|0,3"
    with pytest.raises(ParameterError):
        Curve(make_extension(7, 1), 0, 0)


def test_full_torsion(E25):
    assert E25.order == 36
    assert E25.has_full_torsion(2) and E25.has_full_torsion(3) and E25.has_full_torsion(6)
    assert not E25.has_full_torsion(4)
    assert len(E25.torsion_points(3)) == 9


def test_torsion_field_degree():
    E = Curve(make_extension(5, 1), 0, 1)
    assert torsion_field_degree(E, 3) == 2
    assert torsion_field_degree(E, 2) == 2


def test_weil_pairing_matches_naive_oracle(E25):
    pts = E25.torsion_points(3)
    for P, Q in itertools.product(pts, repeat=2):
        assert weil_pairing(E25, P, Q, 3) == weil_pairing_naive(E25, P, Q, 3)


@pytest.mark.parametrize("M", [2, 3, 6])
def test_weil_pairing_identities(E25, M):
    F = E25.field
    pts = E25.torsion_points(M)
    P1, P2 = E25.torsion_basis(M).basis
    z = weil_pairing(E25, P1, P2, M)
    assert F.multiplicative_order(z) == M  # order-exact on a basis
    for P in pts[:12]:
        assert weil_pairing(E25, P, P, M) == 1
        for Q in pts[:12]:
            e = weil_pairing(E25, P, Q, M)
            assert F.mul(e, weil_pairing(E25, Q, P, M)) == 1
            for R in pts[:4]:
                assert weil_pairing(E25, E25.add(P, R), Q, M) == F.mul(e, weil_pairing(E25, R, Q, M))


def test_weil_pairing_rejects_non_torsion(E25):
    P = next(P for P in E25.points() if P is not None and E25.mul(3, P) is not None)
    with pytest.raises(ParameterError):
        weil_pairing(E25, P, P, 3)


def test_twists_and_automorphisms():
    F = make_extension(5, 2)
    assert len(twist_classes(curve_with_j(F, 0))) == 6
    assert len(twist_classes(curve_with_j(F, 1728 % 5))) == 4
    assert len(twist_classes(curve_with_j(F, F.decode("2,1")))) == 2
    assert max_automorphism_order(F) == 6
    for C in twist_classes(curve_with_j(F, 0)):
        assert C.j_invariant() == 0


def test_isomorphisms_and_canonical_models():
    F = make_extension(7, 2)
    E = Curve(F, F.decode("3,1"), F.decode("1,4"))
    u = F.decode("2,5")
    T = E.twisted(u)
    ws = isomorphisms(F, E.a4, E.a6, T.a4, T.a6)
    assert ws and all(T.is_on_curve(E.apply_iso(w, P)) for w in ws for P in E.points()[1:6])
    assert canonical_model(F, E.a4, E.a6)[:2] == canonical_model(F, T.a4, T.a6)[:2]


def test_representatives_cover_all_isomorphism_classes():
    F = make_extension(7, 1)
    S = enumerate_representatives(F)
    # classes of curves over F_7: 2 per j plus extra twists at j = 0 (6) and j = 1728 (2 since 7 = 3 mod 4)
    assert len(S) == 2 * 7 + 4
    assert len({C.j_invariant() for C in S}) == 7


def test_split_behavior():
    assert split_behavior(-11, 2) == "inert"
    assert split_behavior(-7, 2) == "split"
    assert split_behavior(-4, 3) == "inert"
    assert split_behavior(-3, 3) == "ramified"
