"""l-isogenies: kernels, Velu codomains, normalization into S, and steps.

A step is the composite  w o phi_C : E -> E'  where phi_C is the Velu isogeny
with kernel C and w ranges over every isomorphism from the raw codomain onto
its representative in S (one coset of Aut(E')).  Steps that act identically
on E[M] for the configured merge level M are identified.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .curve import Curve, Point, RepresentativeSet, isomorphisms
from .errors import ParameterError


@dataclass(frozen=True, eq=False)
class KernelSubgroup:
    """A cyclic subgroup of order l that is stable under Frobenius.

    `xs` holds the x-coordinates of one point from each pair {Q, -Q}.  When the
    points themselves are rational, `generator` is the smallest of them.
    """

    curve: Curve
    l: int
    xs: tuple[int, ...]
    generator: Point = None

    @cached_property
    def points(self) -> tuple[Point, ...]:
        if self.generator is None:
            raise ParameterError("kernel points are not rational over the base field")
        E, out, T = self.curve, [None], self.generator
        while T is not None:
            out.append(T)
            T = E.add(T, self.generator)
        return tuple(out)

    @property
    def rational(self) -> bool:
        return self.generator is not None

    def contains(self, P: Point) -> bool:
        return P is None or P[0] in self.xs

    def encode_generator(self) -> str:
        E = self.curve
        if self.rational:
            return E.encode_point(self.generator)
        return f"{E.field.encode(self.xs[0])};*"

    def __eq__(self, other):
        return (isinstance(other, KernelSubgroup) and self.curve == other.curve
                and self.l == other.l and set(self.xs) == set(other.xs))

    def __hash__(self):
        return hash((self.curve, self.l, frozenset(self.xs)))


def _from_generator(E: Curve, l: int, P: Point) -> KernelSubgroup:
    xs, T = set(), P
    while T is not None:
        xs.add(T[0])
        T = E.add(T, P)
    return KernelSubgroup(E, l, tuple(sorted(xs, key=E.field.key)), P)


def _psi3_roots(E: Curve) -> list[int]:
    """Roots in F of the 3-division polynomial 3x^4 + 6a x^2 + 12b x - a^2."""
    F = E.field
    x = np.asarray(F.canonical_order, dtype=np.int64)

    def const(c):
        return np.full(len(x), c, dtype=np.int64)

    x2 = F.vec_mul(x, x)
    val = F.vec_mul(const(F.scalar(3)), F.vec_mul(x2, x2))
    val = F.vec_add(val, F.vec_mul(const(F.mul(F.scalar(6), E.a4)), x2))
    val = F.vec_add(val, F.vec_mul(const(F.mul(F.scalar(12), E.a6)), x))
    val = F.vec_add(val, const(F.neg(F.mul(E.a4, E.a4))))
    return x[val == 0].tolist()


def kernel_subgroups(E: Curve, l: int) -> list[KernelSubgroup]:
    """The Frobenius-stable cyclic subgroups of order l, by smallest point.

    For l = 2 and l = 3 every stable subgroup has rational x-coordinates and is
    found; for l >= 5 the l-torsion must be rational.  With E[l] rational the
    result has exactly l+1 members.
    """
    if l == E.field.q:
        raise ParameterError("l must differ from the characteristic")
    full = E.has_full_torsion(l)
    if l >= 5 and not full:
        raise ParameterError(f"E[{l}] is not rational; extend the field first")
    out, seen = [], set()
    for P in E.torsion_points(l):  # canonical order
        if P is None or P[0] in seen:
            continue
        C = _from_generator(E, l, P)
        seen.update(C.xs)
        out.append(C)
    if l == 3 and not full:
        for x in _psi3_roots(E):
            if x not in seen:  # the points live over the quadratic extension
                seen.add(x)
                out.append(KernelSubgroup(E, 3, (x,), None))
    out.sort(key=lambda C: min(E.field.key(x) for x in C.xs))
    if full:
        assert len(out) == l + 1
    return out


class VeluIsogeny:
    """phi: E -> E/C with Velu's normalized formulas (short Weierstrass)."""

    def __init__(self, C: KernelSubgroup):
        E, F = C.curve, C.curve.field
        self.domain, self.kernel = E, C
        self.l = C.l
        terms = []
        v_tot, w_tot = 0, 0
        for xQ in C.xs:
            gx = F.add(F.mul(F.scalar(3), F.mul(xQ, xQ)), E.a4)
            if C.l == 2:
                vQ, uQ = gx, 0
            else:
                vQ, uQ = F.mul(F.scalar(2), gx), F.mul(F.scalar(4), E.rhs(xQ))
            v_tot = F.add(v_tot, vQ)
            w_tot = F.add(w_tot, F.add(uQ, F.mul(xQ, vQ)))
            terms.append((xQ, vQ, uQ))
        self.terms = terms
        a4 = F.sub(E.a4, F.mul(F.scalar(5), v_tot))
        a6 = F.sub(E.a6, F.mul(F.scalar(7), w_tot))
        self.codomain = Curve(F, a4, a6)

    def __call__(self, P: Point) -> Point:
        if self.kernel.contains(P):
            return None
        F = self.domain.field
        x, y = P
        X, dX = x, 1
        for xQ, vQ, uQ in self.terms:
            inv = F.inv(F.sub(x, xQ))
            inv2 = F.mul(inv, inv)
            X = F.add(X, F.add(F.mul(vQ, inv), F.mul(uQ, inv2)))
            # derivative of the x-map, so that Y = y * dX/dx
            dX = F.sub(dX, F.add(F.mul(vQ, inv2), F.mul(F.scalar(2), F.mul(uQ, F.mul(inv2, inv)))))
        return X, F.mul(y, dX)


def velu(E: Curve, C: KernelSubgroup) -> tuple[Curve, VeluIsogeny]:
    phi = VeluIsogeny(C)
    return phi.codomain, phi


def normalize_to_S(raw: Curve, S: RepresentativeSet) -> tuple[int, int]:
    """Index of the S-member isomorphic to raw, and the smallest twist parameter u."""
    return S.normalize(raw.a4, raw.a6)


@dataclass(eq=False)
class IsogenyStep:
    source: int
    target: int
    kernel: KernelSubgroup
    velu: VeluIsogeny
    scale: int          # w: (X, Y) -> (w^2 X, w^3 Y) onto the target model
    aut: int            # w / w_0, an automorphism of the target
    target_curve: Curve

    def __call__(self, P: Point) -> Point:
        return _scale(self.target_curve.field, self.scale, self.velu(P))

    @property
    def l(self) -> int:
        return self.kernel.l

    def encode(self) -> str:
        F = self.kernel.curve.field
        return (f"{self.source}>{self.target}|kgen={self.kernel.encode_generator()}"
                f"|aut={F.encode(self.aut)}")


def _scale(F, w: int, P: Point) -> Point:
    if P is None:
        return None
    return F.mul(F.mul(w, w), P[0]), F.mul(F.pow(w, 3), P[1])


def isogeny_steps(
    source: int,
    S: RepresentativeSet,
    l: int,
    merge_points: tuple[Point, ...] = (),
    grow: bool = False,
) -> list[IsogenyStep]:
    """All steps out of S[source]; steps agreeing on `merge_points` are merged.

    `merge_points` should generate E[M * p^n_max]; with grow=True unseen
    codomain classes are appended to S (used when S is a seeded subset).
    """
    E = S[source]
    F = E.field
    steps: list[IsogenyStep] = []
    for C in kernel_subgroups(E, l):
        raw, phi = velu(E, C)
        if grow:
            S.add(raw)
        t, _ = normalize_to_S(raw, S)
        T = S[t]
        ws = isomorphisms(F, raw.a4, raw.a6, T.a4, T.a6)
        seen = set()
        for w in ws:
            step = IsogenyStep(source, t, C, phi, w, F.div(w, ws[0]), T)
            sig = tuple(step(P) for P in merge_points)
            if sig in seen:
                continue
            seen.add(sig)
            steps.append(step)
    return steps


def find_dual(step: IsogenyStep, back_steps: list[IsogenyStep], basis: tuple[Point, ...]) -> IsogenyStep:
    """The step psi out of the target with psi o phi = [l] on `basis`."""
    E = step.kernel.curve
    want = tuple(E.mul(step.l, P) for P in basis)
    images = tuple(step(P) for P in basis)
    for psi in back_steps:
        if psi.target == step.source and tuple(psi(P) for P in images) == want:
            return psi
    raise AssertionError("no dual step found")


def modular_polynomial_2(F, j1: int, j2: int) -> int:
    """Phi_2(j1, j2) evaluated in F, from the classical integer coefficients."""
    c = F.scalar
    terms = [
        (1, 3, 0), (1, 0, 3), (-1, 2, 2), (1488, 2, 1), (1488, 1, 2),
        (-162000, 2, 0), (-162000, 0, 2), (40773375, 1, 1),
        (8748000000, 1, 0), (8748000000, 0, 1), (-157464000000000, 0, 0),
    ]
    total = 0
    for coeff, a, b in terms:
        total = F.add(total, F.mul(c(coeff), F.mul(F.pow(j1, a), F.pow(j2, b))))
    return total
