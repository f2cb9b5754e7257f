"""GL_2(Z/m), (Z/m)^x, congruence subgroups and finite-group plumbing.

`FiniteGroup` indexes its elements 0..order-1 and exposes left/right
translations as numpy permutations, which is all the covering engine needs.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property, lru_cache
from math import gcd

import numpy as np
from sympy import factorint, totient

from .errors import ParameterError


@dataclass(frozen=True, order=True)
class GL2Mod:
    m: int
    a: int
    b: int
    c: int
    d: int

    @classmethod
    def make(cls, a, b, c, d, m) -> "GL2Mod":
        A = cls(m, a % m, b % m, c % m, d % m)
        if gcd(A.det, m) != 1:
            raise ParameterError(f"matrix {A.encode()} is not invertible")
        return A

    @classmethod
    def identity(cls, m) -> "GL2Mod":
        return cls(m, 1 % m, 0, 0, 1 % m)

    @classmethod
    def scalar(cls, s, m) -> "GL2Mod":
        return cls.make(s, 0, 0, s, m)

    @property
    def det(self) -> int:
        return (self.a * self.d - self.b * self.c) % self.m

    def __mul__(self, other: "GL2Mod") -> "GL2Mod":
        if self.m != other.m:
            raise ParameterError("moduli differ")
        m = self.m
        return GL2Mod(m, (self.a * other.a + self.b * other.c) % m, (self.a * other.b + self.b * other.d) % m,
                      (self.c * other.a + self.d * other.c) % m, (self.c * other.b + self.d * other.d) % m)

    def inverse(self) -> "GL2Mod":
        if gcd(self.det, self.m) != 1:
            raise ParameterError("not invertible")
        di = pow(self.det, -1, self.m)
        m = self.m
        return GL2Mod(m, self.d * di % m, -self.b * di % m, -self.c * di % m, self.a * di % m)

    def reduce(self, m2: int) -> "GL2Mod":
        if self.m % m2:
            raise ParameterError(f"{m2} does not divide {self.m}")
        return GL2Mod(m2, self.a % m2, self.b % m2, self.c % m2, self.d % m2)

    def code(self) -> int:
        m = self.m
        return self.a + m * (self.b + m * (self.c + m * self.d))

    def encode(self) -> str:
        return f"{self.a},{self.b};{self.c},{self.d}@{self.m}"

    @classmethod
    def decode(cls, text: str) -> "GL2Mod":
        body, m = text.split("@")
        r1, r2 = body.split(";")
        a, b = r1.split(",")
        c, d = r2.split(",")
        return cls.make(int(a), int(b), int(c), int(d), int(m))


def gl2_order_formula(p: int, n: int) -> int:
    return p ** (4 * (n - 1)) * (p * p - 1) * (p * p - p)


def brute_gl2_count(m: int) -> int:
    """Count invertible 2x2 matrices over Z/m by enumeration."""
    r = np.arange(m, dtype=np.int64)
    a, b, c, d = np.meshgrid(r, r, r, r, indexing="ij")
    det = (a * d - b * c) % m
    units = np.array([gcd(int(x), m) == 1 for x in range(m)])
    return int(units[det].sum())


def gl2_order(p: int, n: int, brute: bool = True) -> int:
    if n < 1:
        raise ParameterError("n must be at least 1")
    value = gl2_order_formula(p, n)
    if brute and p**n <= 27:
        count = brute_gl2_count(p**n)
        if count != value:
            raise AssertionError(f"|GL2(Z/{p}^{n})|: formula {value} != count {count}")
    return value


def multiplicative_order(l: int, m: int) -> int:
    if gcd(l, m) != 1:
        raise ParameterError(f"gcd({l},{m}) != 1")
    if m == 1:
        return 1
    n = int(totient(m))
    for r, e in factorint(n).items():
        for _ in range(e):
            if pow(l, n // r, m) == 1:
                n //= r
            else:
                break
    return n


def unit_index(m: int, l: int) -> int:
    """|(Z/m)^x / <l>|."""
    return int(totient(m)) // multiplicative_order(l % m if m > 1 else 0, m)


def primes_up_to(bound: int) -> np.ndarray:
    sieve = np.ones(bound + 1, dtype=bool)
    sieve[:2] = False
    for i in range(2, int(bound**0.5) + 1):
        if sieve[i]:
            sieve[i * i :: i] = False
    return np.flatnonzero(sieve)


def generator_density(p: int, N: int, bound: int, threads: int | None = None) -> Fraction:
    """Fraction of primes l <= bound, l not dividing pN, that generate (Z/Np^2)^x."""
    if N not in (1, 2) or p <= 2 or bound < 1000:
        raise ParameterError("density needs N in {1,2}, p > 2 and bound >= 1000")
    m = N * p * p
    phi = int(totient(m))
    gens = np.zeros(m, dtype=bool)
    for r in range(m):
        if gcd(r, m) == 1 and multiplicative_order(r, m) == phi:
            gens[r] = True
    primes = primes_up_to(bound)
    primes = primes[(primes % p != 0) & (primes % N != 0 if N > 1 else True)]
    threads = threads or int(os.environ.get("ISOTOWER_THREADS", "1"))
    chunks = np.array_split(primes, max(1, threads))
    with ThreadPoolExecutor(max_workers=max(1, threads)) as pool:
        hits = sum(pool.map(lambda c: int(gens[c % m].sum()), chunks))
    return Fraction(hits, len(primes))


def density_target(p: int) -> Fraction:
    return Fraction(int(totient(p - 1)), p)


# finite groups

class FiniteGroup:
    """Abstract finite group on indices 0..order-1."""

    identity: int = 0

    @property
    def order(self) -> int:
        raise NotImplementedError

    def mul(self, i: int, j: int) -> int:
        raise NotImplementedError

    def inv(self, i: int) -> int:
        raise NotImplementedError

    def label(self, i: int) -> str:
        return str(i)

    def right_translation(self, g: int) -> np.ndarray:
        """sigma -> sigma * g, as an index array."""
        return np.array([self.mul(s, g) for s in range(self.order)], dtype=np.int64)

    def left_translation(self, g: int) -> np.ndarray:
        return np.array([self.mul(g, s) for s in range(self.order)], dtype=np.int64)

    @cached_property
    def table(self) -> np.ndarray:
        if self.order > 10**4:
            raise ParameterError("operation tables are limited to order 10^4")
        return np.stack([self.right_translation(g) for g in range(self.order)], axis=1)

    def is_normal(self, H) -> bool:
        Hs = set(int(h) for h in H)
        return all(self.mul(self.mul(g, h), self.inv(g)) in Hs for g in range(self.order) for h in Hs)

    def generated_subgroup(self, gens) -> list[int]:
        elems, frontier = {self.identity}, [self.identity]
        while frontier:
            nxt = []
            for x in frontier:
                for g in gens:
                    y = self.mul(x, g)
                    if y not in elems:
                        elems.add(y)
                        nxt.append(y)
            frontier = nxt
        return sorted(elems)

    def is_cyclic(self) -> bool:
        n = self.order
        return any(len(self.generated_subgroup([g])) == n for g in range(n))

    def check_axioms(self) -> bool:
        """Exhaustive group-law check (small orders only)."""
        T, n, e = self.table, self.order, self.identity
        if n > 300:
            raise ParameterError("exhaustive axiom check limited to order 300")
        idx = np.arange(n)
        assoc = np.array_equal(T[T[:, :, None], idx[None, None, :]], T[idx[:, None, None], T[None, :, :]])
        ident = np.array_equal(T[e], idx) and np.array_equal(T[:, e], idx)
        inv = all(T[i, self.inv(i)] == e for i in range(n))
        return bool(assoc and ident and inv)


class TableGroup(FiniteGroup):
    def __init__(self, table, labels=None, identity: int = 0):
        self._t = np.asarray(table, dtype=np.int64)
        self.identity = identity
        self._labels = labels
        n = len(self._t)
        self._inv = np.empty(n, dtype=np.int64)
        for i in range(n):
            self._inv[i] = int(np.flatnonzero(self._t[i] == identity)[0])

    @property
    def order(self):
        return len(self._t)

    def mul(self, i, j):
        return int(self._t[i, j])

    def inv(self, i):
        return int(self._inv[i])

    def label(self, i):
        return self._labels[i] if self._labels else str(i)

    def right_translation(self, g):
        return self._t[:, g].copy()

    def left_translation(self, g):
        return self._t[g].copy()


class CyclicGroup(FiniteGroup):
    def __init__(self, n: int):
        self.n = n

    @property
    def order(self):
        return self.n

    def mul(self, i, j):
        return (i + j) % self.n

    def inv(self, i):
        return -i % self.n

    def right_translation(self, g):
        return (np.arange(self.n) + g) % self.n

    left_translation = right_translation


def permutation_group(gens, cap: int = 10**4) -> TableGroup:
    """The group generated by permutations (tuples); product is composition g(h(x))."""
    gens = [tuple(g) for g in gens]
    n = len(gens[0]) if gens else 0
    ident = tuple(range(n))
    elems, frontier = {ident: 0}, [ident]
    while frontier:
        nxt = []
        for x in frontier:
            for g in gens:
                y = tuple(g[i] for i in x)
                if y not in elems:
                    if len(elems) >= cap:
                        raise ParameterError("permutation group exceeds cap")
                    elems[y] = len(elems)
                    nxt.append(y)
        frontier = nxt
    order = sorted(elems)
    pos = {x: i for i, x in enumerate(order)}
    table = [[pos[tuple(a[i] for i in b)] for b in order] for a in order]
    return TableGroup(table, [str(x) for x in order], identity=pos[ident])


class UnitGroup(FiniteGroup):
    """(Z/m)^x with elements sorted as residues."""

    def __init__(self, m: int):
        self.m = m
        self.elements = [r for r in range(m) if gcd(r, m) == 1] if m > 1 else [0]
        self.index = {r: i for i, r in enumerate(self.elements)}
        self.identity = self.index[1 % m]
        self._res = np.array(self.elements, dtype=np.int64)
        self._lookup = np.full(m, -1, dtype=np.int64)
        self._lookup[self._res] = np.arange(len(self.elements))

    @property
    def order(self):
        return len(self.elements)

    def element(self, r: int) -> int:
        return self.index[r % self.m]

    def mul(self, i, j):
        return self.index[self.elements[i] * self.elements[j] % self.m]

    def inv(self, i):
        return self.index[pow(self.elements[i], -1, self.m)] if self.m > 1 else 0

    def label(self, i):
        return str(self.elements[i])

    def right_translation(self, g):
        return self._lookup[self._res * self.elements[g] % self.m]

    left_translation = right_translation


class GL2Group(FiniteGroup):
    """GL_2(Z/m) with elements sorted by matrix code."""

    def __init__(self, m: int):
        self.m = m
        codes = np.arange(m**4, dtype=np.int64)
        a, b, c, d = codes % m, codes // m % m, codes // m**2 % m, codes // m**3
        units = np.array([gcd(x, m) == 1 for x in range(m)])
        ok = units[(a * d - b * c) % m]
        self.codes = codes[ok]
        self.A, self.B, self.C, self.D = a[ok], b[ok], c[ok], d[ok]
        self._lookup = np.full(m**4, -1, dtype=np.int64)
        self._lookup[self.codes] = np.arange(len(self.codes))
        self.identity = int(self._lookup[GL2Mod.identity(m).code()])

    @property
    def order(self):
        return len(self.codes)

    def element(self, g: GL2Mod) -> int:
        return int(self._lookup[g.code()])

    def matrix(self, i: int) -> GL2Mod:
        return GL2Mod(self.m, int(self.A[i]), int(self.B[i]), int(self.C[i]), int(self.D[i]))

    def mul(self, i, j):
        return self.element(self.matrix(i) * self.matrix(j))

    def inv(self, i):
        return self.element(self.matrix(i).inverse())

    def label(self, i):
        return self.matrix(i).encode()

    def det(self, i) -> int:
        return self.matrix(i).det

    def _compose(self, A, B, C, D, a, b, c, d):
        m = self.m
        return self._lookup[((A * a + B * c) % m) + m * (((A * b + B * d) % m)
                            + m * (((C * a + D * c) % m) + m * ((C * b + D * d) % m)))]

    def right_translation(self, g):
        x = self.matrix(g)
        return self._compose(self.A, self.B, self.C, self.D, x.a, x.b, x.c, x.d)

    def left_translation(self, g):
        x = self.matrix(g)
        m = self.m
        A, B, C, D = self.A, self.B, self.C, self.D
        return self._lookup[((x.a * A + x.b * C) % m) + m * (((x.a * B + x.b * D) % m)
                            + m * (((x.c * A + x.d * C) % m) + m * ((x.c * B + x.d * D) % m)))]

    def reduction_map(self, m2: int) -> np.ndarray:
        """Index array sending each element to its image in GL2Group(m2)."""
        target = gl2_group(m2)
        return target._lookup[self.A % m2 + m2 * (self.B % m2 + m2 * (self.C % m2 + m2 * (self.D % m2)))]

    def dets(self) -> np.ndarray:
        return (self.A * self.D - self.B * self.C) % self.m


@lru_cache(maxsize=None)
def gl2_group(m: int) -> GL2Group:
    return GL2Group(m)


@lru_cache(maxsize=None)
def unit_group(m: int) -> UnitGroup:
    return UnitGroup(m)


@dataclass
class CongruenceSubgroup:
    p: int
    n: int
    m: int
    kind: str            # "matrix" (G_{n,m}) or "unit" (script G_{n,m})
    ambient: FiniteGroup
    members: list[int]   # indices into the ambient group

    @cached_property
    def group(self) -> TableGroup:
        pos = {g: i for i, g in enumerate(self.members)}
        table = [[pos[self.ambient.mul(g, h)] for h in self.members] for g in self.members]
        labels = [self.ambient.label(g) for g in self.members]
        return TableGroup(table, labels, identity=pos[self.ambient.identity])

    @property
    def order(self) -> int:
        return len(self.members)


def congruence_subgroup(p: int, n: int, m: int, kind: str = "matrix") -> CongruenceSubgroup:
    """Elements of GL_2(Z/p^n) (or (Z/p^n)^x) congruent to 1 mod p^m."""
    if n <= m or m < 0:
        raise ParameterError("need n > m >= 0")
    pm = p**m
    if kind == "matrix":
        G = gl2_group(p**n)
        ok = (G.A % pm == 1 % pm) & (G.B % pm == 0) & (G.C % pm == 0) & (G.D % pm == 1 % pm)
        return CongruenceSubgroup(p, n, m, kind, G, np.flatnonzero(ok).tolist())
    if kind == "unit":
        U = unit_group(p**n)
        members = [i for i, r in enumerate(U.elements) if r % pm == 1 % pm]
        return CongruenceSubgroup(p, n, m, kind, U, members)
    raise ParameterError(f"unknown kind {kind!r}")
