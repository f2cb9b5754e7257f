import itertools
import re

import pytest
from hypothesis import given, strategies as st

from isotower.curve import Curve, RepresentativeSet, enumerate_representatives, weil_pairing
from isotower.errors import ParameterError
from isotower.field import make_extension
from isotower.isogeny import find_dual, isogeny_steps, kernel_subgroups, modular_polynomial_2, velu

EDGE_RE = re.compile(r"^\d+>\d+\|kgen=(inf|[\d,]+;[\d,*]+)\|aut=[\d,]+$")


@pytest.fixture(scope="module")
def E25():
    return Curve(make_extension(5, 2), 0, 1)


@pytest.fixture(scope="module")
def closure25(E25):
    """2-isogeny closure of y^2 = x^3 + 1 over F_25, steps merged on E[6]."""
    S = RepresentativeSet(E25.field, [E25])
    steps = []
    i = 0
    while i < len(S):
        E = S[i]
        steps += isogeny_steps(i, S, 2, E.torsion_basis(6).basis, grow=True)
        i += 1
    return S, steps


@pytest.mark.parametrize("l", [2, 3])
def test_kernel_count_with_full_torsion(E25, l):
    Ks = kernel_subgroups(E25, l)
    assert len(Ks) == l + 1
    assert all(len(K.points) == l for K in Ks)
    assert len({frozenset(K.points) for K in Ks}) == l + 1


@pytest.mark.parametrize("l", [2, 3])
def test_velu_is_a_homomorphism_with_isogenous_codomain(E25, l):
    pts = E25.points()
    for K in kernel_subgroups(E25, l):
        E2, phi = velu(E25, K)
        assert E2.order == E25.order
        assert all(phi(P) is None for P in K.points)
        for P in pts[::3]:
            assert E2.is_on_curve(phi(P)) or phi(P) is None
            for Q in pts[::7]:
                assert phi(E25.add(P, Q)) == E2.add(phi(P), phi(Q))


def test_non_rational_three_kernels_over_f7():
    F = make_extension(7, 1)
    seen = 0
    for E in enumerate_representatives(F):
        for K in kernel_subgroups(E, 3):
            E2, phi = velu(E, K)
            assert E2.order == E.order
            if not K.rational:
                seen += 1
                assert K.encode_generator().endswith(";*")
                with pytest.raises(ParameterError):
                    K.points
            for P in E.points():
                for Q in E.points()[::5]:
                    assert phi(E.add(P, Q)) == E2.add(phi(P), phi(Q))
    assert seen > 0


def test_large_l_needs_rational_torsion():
    E = Curve(make_extension(7, 1), 1, 3)
    with pytest.raises(ParameterError):
        kernel_subgroups(E, 5)


def test_pairing_compatibility_on_all_of_e3(E25):
    """<phi P, phi Q>_3 = <P, Q>_3^2 for every 2-isogeny and every P, Q in E[3]."""
    F = E25.field
    E3 = E25.torsion_points(3)
    for K in kernel_subgroups(E25, 2):
        E2, phi = velu(E25, K)
        for P, Q in itertools.product(E3, repeat=2):
            assert weil_pairing(E2, phi(P), phi(Q), 3) == F.pow(weil_pairing(E25, P, Q, 3), 2)


def test_dual_composition_is_multiplication_by_l(closure25):
    S, steps = closure25
    for st_ in steps:
        E = S[st_.source]
        basis = E.torsion_basis(6).basis
        back = [s for s in steps if s.source == st_.target]
        psi = find_dual(st_, back, basis)
        for P in E.points():
            assert psi(st_(P)) == E.mul(2, P)


def test_modular_polynomial_vanishes_on_isogenous_pairs(closure25):
    S, steps = closure25
    F = S.field
    for st_ in steps:
        assert modular_polynomial_2(F, S[st_.source].j_invariant(), S[st_.target].j_invariant()) == 0


def test_steps_are_merged_and_encoded(closure25):
    S, steps = closure25
    for i in range(len(S)):
        out = [s for s in steps if s.source == i]
        # one step per kernel and per automorphism class acting differently on E[6]
        assert len(out) >= 3
        sigs = {tuple(s(P) for P in S[i].torsion_basis(6).basis) for s in out}
        assert len(sigs) == len(out)
    for s in steps:
        assert EDGE_RE.match(s.encode()), s.encode()


@given(st.data())
def test_steps_respect_group_law(closure25, data):
    S, steps = closure25
    s = data.draw(st.sampled_from(steps))
    E, T = S[s.source], S[s.target]
    P = data.draw(st.sampled_from(E.points()))
    Q = data.draw(st.sampled_from(E.points()))
    assert s(E.add(P, Q)) == T.add(s(P), s(Q))
