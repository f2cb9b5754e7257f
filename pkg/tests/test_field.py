import pytest
from hypothesis import given, strategies as st
from sympy import GF, Poly, symbols

from isotower.errors import CapExceeded, ParameterError
from isotower.field import embedding, is_irreducible, make_extension

FIELDS = [(5, 1), (5, 2), (7, 3), (13, 2), (11, 1)]
x = symbols("x")


def elems(F):
    return st.integers(0, F.order - 1)


@pytest.mark.parametrize("q,k", FIELDS)
def test_canonical_modulus_is_irreducible(q, k):
    F = make_extension(q, k)
    assert len(F.modulus) == k + 1 and F.modulus[-1] == 1
    assert is_irreducible(list(F.modulus), q)
    assert Poly(list(reversed(F.modulus)), x, modulus=q).is_irreducible


@pytest.mark.parametrize("q,k", FIELDS)
@given(data=st.data())
def test_field_axioms(q, k, data):
    F = make_extension(q, k)
    a, b, c = (data.draw(elems(F)) for _ in range(3))
    assert F.add(a, F.add(b, c)) == F.add(F.add(a, b), c)
    assert F.mul(a, F.mul(b, c)) == F.mul(F.mul(a, b), c)
    assert F.mul(a, F.add(b, c)) == F.add(F.mul(a, b), F.mul(a, c))
    assert F.add(a, F.neg(a)) == 0
    if a:
        assert F.mul(a, F.inv(a)) == 1
        assert F.pow(a, F.order - 1) == 1


@pytest.mark.parametrize("q,k", [(5, 2), (7, 3)])
@given(data=st.data())
def test_multiplication_matches_polynomial_arithmetic(q, k, data):
    F = make_extension(q, k)
    a, b = data.draw(elems(F)), data.draw(elems(F))
    mod = Poly(list(reversed(F.modulus)), x, domain=GF(q))
    pa = Poly(list(reversed(F.digits(a))), x, domain=GF(q))
    pb = Poly(list(reversed(F.digits(b))), x, domain=GF(q))
    prod = (pa * pb).rem(mod)
    coeffs = [int(c) % q for c in reversed(prod.all_coeffs())]
    assert F.mul(a, b) == F.from_digits(coeffs + [0] * (k - len(coeffs)))


@given(data=st.data())
def test_frobenius_is_a_field_automorphism(data):
    F = make_extension(7, 3)
    a, b = data.draw(elems(F)), data.draw(elems(F))
    assert F.frobenius(F.add(a, b)) == F.add(F.frobenius(a), F.frobenius(b))
    assert F.frobenius(F.mul(a, b)) == F.mul(F.frobenius(a), F.frobenius(b))
    assert F.frobenius(a, 3) == a


def test_prime_subfield_is_frobenius_fixed():
    F = make_extension(5, 2)
    fixed = [a for a in range(F.order) if F.frobenius(a) == a]
    assert fixed == list(range(5))


@given(data=st.data())
def test_sqrt(data):
    F = make_extension(13, 2)
    a = data.draw(elems(F))
    r = F.sqrt(F.mul(a, a))
    assert F.mul(r, r) == F.mul(a, a)
    assert F.is_square(F.mul(a, a))


def test_nonsquares_have_no_root():
    F = make_extension(11, 1)
    nonsq = [a for a in range(1, 11) if not F.is_square(a)]
    assert len(nonsq) == 5 and all(F.sqrt(a) is None for a in nonsq)


def test_encoding_roundtrip_and_example():
    F = make_extension(5, 2)
    a = F.decode("3,1")
    assert F.digits(a) == [3, 1] and F.encode(a) == "3,1"
    e = F("3,1")
    assert e.coeffs == [3, 1] and (e * e.inverse()) == 1
    with pytest.raises(ParameterError):
        F.decode("5,1")
    with pytest.raises(ParameterError):
        F.decode("1,2,3")


def test_element_wrapper_arithmetic():
    F = make_extension(7, 2)
    a, b = F("2,3"), F("4,1")
    assert (a + b) - b == a
    assert (a * b) / b == a
    assert -a + a == 0
    assert a ** (F.order - 1) == 1
    assert F(3) == 3


def test_bad_parameters():
    with pytest.raises(ParameterError):
        make_extension(4, 1)
    with pytest.raises(ParameterError):
        make_extension(3, 2)
    with pytest.raises(CapExceeded):
        make_extension(101, 5, cap=10**6)


def test_extensions_are_cached():
    assert make_extension(5, 2) is make_extension(5, 2)


@pytest.mark.parametrize("small,big", [((5, 1), (5, 2)), ((5, 2), (5, 4)), ((7, 1), (7, 3))])
def test_embedding_is_a_ring_homomorphism(small, big):
    S, B = make_extension(*small), make_extension(*big)
    emb = embedding(S, B)
    assert len(set(emb)) == S.order
    for a in range(0, S.order, max(1, S.order // 10)):
        for b in range(0, S.order, max(1, S.order // 7)):
            assert emb[S.add(a, b)] == B.add(emb[a], emb[b])
            assert emb[S.mul(a, b)] == B.mul(emb[a], emb[b])
