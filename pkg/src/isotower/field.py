"""Exact arithmetic in F_q and F_{q^k}.

Elements are plain ints: the polynomial c_0 + c_1 x + ... + c_{k-1} x^{k-1}
is stored as sum(c_i * q**i).  All heavy lifting goes through discrete-log
tables (exp/log plus a Zech table for addition), so every operation is O(1).
`FieldElement` wraps an int for the public API; inner loops use the raw ints.
"""

from __future__ import annotations

import itertools
from functools import cached_property, lru_cache
from math import gcd

import numpy as np
from sympy import factorint, isprime

from .errors import CapExceeded, ParameterError

DEFAULT_FIELD_CAP = 10**7
SQRT_SEARCH_THRESHOLD = 10**5
_LIST_TABLE_LIMIT = 4 * 10**6


# polynomial helpers: coefficient lists, low degree first, over Z/q

def _trim(a):
    while a and a[-1] == 0:
        a.pop()
    return a


def _poly_mod(a, f, q):
    a = list(a)
    df = len(f) - 1
    inv_lead = pow(f[-1], -1, q)
    while len(_trim(a)) - 1 >= df:
        c = a[-1] * inv_lead % q
        shift = len(a) - 1 - df
        for i, fi in enumerate(f):
            a[shift + i] = (a[shift + i] - c * fi) % q
    return a


def _poly_mulmod(a, b, f, q):
    if not a or not b:
        return []
    prod = [0] * (len(a) + len(b) - 1)
    for i, ai in enumerate(a):
        if ai:
            for j, bj in enumerate(b):
                prod[i + j] = (prod[i + j] + ai * bj) % q
    return _poly_mod(prod, f, q)


def _poly_powmod(a, e, f, q):
    result, base = [1], _poly_mod(a, f, q)
    while e:
        if e & 1:
            result = _poly_mulmod(result, base, f, q)
        base = _poly_mulmod(base, base, f, q)
        e >>= 1
    return result


def _poly_gcd(a, b, q):
    a, b = _trim(list(a)), _trim(list(b))
    while b:
        a, b = b, _trim(_poly_mod(a, b, q))
    return a


def is_irreducible(f, q) -> bool:
    """Rabin's test for a monic polynomial f (low-degree-first list)."""
    k = len(f) - 1
    if k == 1:
        return True
    x = [0, 1]
    if _trim(_poly_mod(_sub(_poly_powmod(x, q**k, f, q), x, q), f, q)):
        return False
    for r in factorint(k):
        h = _sub(_poly_powmod(x, q ** (k // r), f, q), x, q)
        if len(_poly_gcd(f, h, q)) > 1:
            return False
    return True


def _sub(a, b, q):
    n = max(len(a), len(b))
    a = list(a) + [0] * (n - len(a))
    b = list(b) + [0] * (n - len(b))
    return _trim([(x - y) % q for x, y in zip(a, b)])


@lru_cache(maxsize=None)
def canonical_modulus(q: int, k: int) -> tuple[int, ...]:
    """Smallest monic irreducible of degree k, coefficients compared low-degree-first."""
    if k == 1:
        return (0, 1)
    for coeffs in itertools.product(range(q), repeat=k):
        if coeffs[0] == 0:
            continue
        f = list(coeffs) + [1]
        if is_irreducible(f, q):
            return tuple(f)
    raise AssertionError("no irreducible polynomial found")


class ExtensionField:
    """The field F_{q^k} built from the canonical modulus."""

    def __init__(self, q: int, k: int, modulus: tuple[int, ...]):
        self.q, self.k, self.modulus = q, k, modulus
        self.order = q**k
        self._build_tables()

    def __repr__(self):
        return f"ExtensionField(q={self.q}, k={self.k})"

    def __reduce__(self):
        return make_extension, (self.q, self.k)

    # digit conversion

    def digits(self, a: int) -> list[int]:
        q = self.q
        out = []
        for _ in range(self.k):
            a, r = divmod(a, q)
            out.append(r)
        return out

    def from_digits(self, ds) -> int:
        v = 0
        for c in reversed(list(ds)):
            v = v * self.q + c % self.q
        return v

    @cached_property
    def digit_array(self) -> np.ndarray:
        vals = np.arange(self.order, dtype=np.int64)
        cols = []
        for _ in range(self.k):
            cols.append(vals % self.q)
            vals //= self.q
        return np.stack(cols, axis=1)

    def _mult_matrix(self, h: list[int]) -> np.ndarray:
        """Matrix of z -> h*z on digit vectors (column j = h*x^j)."""
        f, q, k = list(self.modulus), self.q, self.k
        cols = []
        for j in range(k):
            xj = [0] * j + [1]
            prod = _poly_mulmod(h, xj, f, q)
            cols.append(prod + [0] * (k - len(prod)))
        return np.array(cols, dtype=np.int64).T

    def _build_tables(self):
        q, k, Q = self.q, self.k, self.order
        f = list(self.modulus)
        prime_factors = list(factorint(Q - 1))
        gen = None
        for a in self.canonical_order_iter():
            if a == 0:
                continue
            g = self.digits(a)
            if all(_trim(_poly_powmod(g, (Q - 1) // r, f, q)) != [1] for r in prime_factors):
                gen = a
                break
        self.generator = gen
        g = self.digits(gen)
        weights = q ** np.arange(k, dtype=np.int64)
        # baby steps sequentially, giant steps vectorized
        B = max(1, int((Q - 1) ** 0.5))
        A = self._mult_matrix(g)
        vec = np.zeros(k, dtype=np.int64)
        vec[0] = 1
        baby = np.empty((B, k), dtype=np.int64)
        for i in range(B):
            baby[i] = vec
            vec = A @ vec % q
        giant_mat = self._mult_matrix(list(vec))  # multiplication by g^B
        exp = np.empty(Q - 1, dtype=np.int64)
        block = baby
        for start in range(0, Q - 1, B):
            stop = min(start + B, Q - 1)
            exp[start:stop] = (block[: stop - start] @ weights)
            block = block @ giant_mat.T % q
        log = np.full(Q, -1, dtype=np.int64)
        log[exp] = np.arange(Q - 1, dtype=np.int64)
        if np.any(log[1:] < 0):
            raise AssertionError("generator is not primitive")
        c0 = exp % q
        one_plus = exp - c0 + (c0 + 1) % q
        zech = np.where(one_plus == 0, -1, log[one_plus])
        # rank: position in canonical (low-degree-first lexicographic) order
        ds = self.digit_array
        rank = ds @ weights[::-1]
        self._exp_np, self._log_np, self._rank_np = exp, log, rank
        if Q <= _LIST_TABLE_LIMIT:
            self._exp, self._log, self._zech = exp.tolist(), log.tolist(), zech.tolist()
            self.rank = rank.tolist()
        else:
            self._exp, self._log, self._zech, self.rank = exp, log, zech, rank
        self.minus_one = self._exp[(Q - 1) // 2] if q > 2 else 1

    # canonical order

    def canonical_order_iter(self):
        q, k = self.q, self.k
        for coeffs in itertools.product(range(q), repeat=k):
            v = 0
            for c in reversed(coeffs):
                v = v * q + c
            yield v

    @cached_property
    def canonical_order(self) -> list[int]:
        return np.argsort(self._rank_np, kind="stable").tolist()

    def key(self, a: int) -> int:
        return self.rank[a]

    # arithmetic on raw ints

    def add(self, a: int, b: int) -> int:
        if self.k == 1:
            return (a + b) % self.q
        if a == 0:
            return b
        if b == 0:
            return a
        n = self.order - 1
        la = self._log[a]
        z = self._zech[(self._log[b] - la) % n]
        if z < 0:
            return 0
        return self._exp[(la + z) % n]

    def neg(self, a: int) -> int:
        if self.k == 1:
            return -a % self.q
        if a == 0:
            return 0
        return self._exp[(self._log[a] + (self.order - 1) // 2) % (self.order - 1)]

    def sub(self, a: int, b: int) -> int:
        return self.add(a, self.neg(b))

    def mul(self, a: int, b: int) -> int:
        if a == 0 or b == 0:
            return 0
        if self.k == 1:
            return a * b % self.q
        return self._exp[(self._log[a] + self._log[b]) % (self.order - 1)]

    def inv(self, a: int) -> int:
        if a == 0:
            raise ZeroDivisionError("inverse of zero")
        return self._exp[-self._log[a] % (self.order - 1)]

    def div(self, a: int, b: int) -> int:
        return self.mul(a, self.inv(b))

    def pow(self, a: int, e: int) -> int:
        if a == 0:
            if e < 0:
                raise ZeroDivisionError("zero to a negative power")
            return 0 if e else 1
        return self._exp[self._log[a] * e % (self.order - 1)]

    def log(self, a: int) -> int:
        if a == 0:
            raise ValueError("log of zero")
        return self._log[a]

    def exp(self, e: int) -> int:
        return self._exp[e % (self.order - 1)]

    def scalar(self, n: int) -> int:
        """Image of the integer n in the prime subfield."""
        return n % self.q

    def frobenius(self, a: int, times: int = 1) -> int:
        return self.pow(a, self.q**times)

    def is_square(self, a: int) -> bool:
        return a == 0 or self._log[a] % 2 == 0

    def multiplicative_order(self, a: int) -> int:
        if a == 0:
            raise ValueError("zero has no multiplicative order")
        n = self.order - 1
        return n // gcd(self._log[a], n)

    def sqrt(self, a: int):
        """A square root of a, or None; ties broken toward the smaller canonical key."""
        if a == 0:
            return 0
        if self.order <= SQRT_SEARCH_THRESHOLD:
            return self._sqrt_table[a]
        r = self._tonelli_shanks(a)
        if r is None:
            return None
        s = self.neg(r)
        return r if self.rank[r] <= self.rank[s] else s

    @cached_property
    def _sqrt_table(self) -> list:
        table = [None] * self.order
        for x in self.canonical_order:
            sq = self.mul(x, x)
            if table[sq] is None:
                table[sq] = x
        return table

    def _tonelli_shanks(self, a: int):
        n = self.order - 1
        if self.pow(a, n // 2) != 1:
            return None
        s, odd = 0, n
        while odd % 2 == 0:
            odd //= 2
            s += 1
        z = next(x for x in self.canonical_order_iter() if x and self.pow(x, n // 2) != 1)
        m, c, t, r = s, self.pow(z, odd), self.pow(a, odd), self.pow(a, (odd + 1) // 2)
        while t != 1:
            i, tt = 0, t
            while tt != 1:
                tt = self.mul(tt, tt)
                i += 1
            b = c
            for _ in range(m - i - 1):
                b = self.mul(b, b)
            m, c = i, self.mul(b, b)
            t, r = self.mul(t, c), self.mul(r, b)
        return r

    # encodings

    def encode(self, a: int) -> str:
        return ",".join(str(c) for c in self.digits(a))

    def decode(self, text: str) -> int:
        parts = [int(s) for s in text.split(",")]
        if len(parts) > self.k or any(not 0 <= c < self.q for c in parts):
            raise ParameterError(f"bad element encoding {text!r} for F_{self.q}^{self.k}")
        return self.from_digits(parts)

    def __call__(self, value) -> "FieldElement":
        if isinstance(value, FieldElement):
            return value
        if isinstance(value, str):
            return FieldElement(self, self.decode(value))
        if isinstance(value, (list, tuple)):
            return FieldElement(self, self.from_digits(value))
        return FieldElement(self, self.scalar(int(value)))

    def elements(self):
        return (FieldElement(self, a) for a in self.canonical_order)

    def one(self) -> "FieldElement":
        return FieldElement(self, 1)

    def zero(self) -> "FieldElement":
        return FieldElement(self, 0)

    # vectorized helpers used by point counting

    def vec_mul(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        n = self.order - 1
        out = self._exp_np[(self._log_np[a] + self._log_np[b]) % n]
        return np.where((a == 0) | (b == 0), 0, out)

    def vec_add(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        if self.k == 1:
            return (a + b) % self.q
        da = self.digit_array
        weights = self.q ** np.arange(self.k, dtype=np.int64)
        return (da[a] + da[b]) % self.q @ weights

    def vec_is_square(self, a: np.ndarray) -> np.ndarray:
        return (a == 0) | (self._log_np[a] % 2 == 0)


class FieldElement:
    """An immutable element of an ExtensionField."""

    __slots__ = ("parent", "value")

    def __init__(self, parent: ExtensionField, value: int):
        object.__setattr__(self, "parent", parent)
        object.__setattr__(self, "value", value)

    def __setattr__(self, name, value):
        raise AttributeError("FieldElement is immutable")

    @property
    def coeffs(self) -> list[int]:
        return self.parent.digits(self.value)

    def _other(self, other) -> int:
        if isinstance(other, FieldElement):
            if other.parent is not self.parent:
                raise ValueError("elements of different fields")
            return other.value
        if isinstance(other, int):
            return self.parent.scalar(other)
        return NotImplemented

    def __add__(self, other):
        b = self._other(other)
        return FieldElement(self.parent, self.parent.add(self.value, b))

    __radd__ = __add__

    def __sub__(self, other):
        b = self._other(other)
        return FieldElement(self.parent, self.parent.sub(self.value, b))

    def __rsub__(self, other):
        b = self._other(other)
        return FieldElement(self.parent, self.parent.sub(b, self.value))

    def __mul__(self, other):
        b = self._other(other)
        return FieldElement(self.parent, self.parent.mul(self.value, b))

    __rmul__ = __mul__

    def __truediv__(self, other):
        b = self._other(other)
        return FieldElement(self.parent, self.parent.div(self.value, b))

    def __rtruediv__(self, other):
        b = self._other(other)
        return FieldElement(self.parent, self.parent.div(b, self.value))

    def __neg__(self):
        return FieldElement(self.parent, self.parent.neg(self.value))

    def __pow__(self, e: int):
        return FieldElement(self.parent, self.parent.pow(self.value, e))

    def inverse(self):
        return FieldElement(self.parent, self.parent.inv(self.value))

    def sqrt(self):
        r = self.parent.sqrt(self.value)
        return None if r is None else FieldElement(self.parent, r)

    def is_square(self) -> bool:
        return self.parent.is_square(self.value)

    def multiplicative_order(self) -> int:
        return self.parent.multiplicative_order(self.value)

    def __eq__(self, other):
        if isinstance(other, FieldElement):
            return self.parent is other.parent and self.value == other.value
        if isinstance(other, int):
            return self.value == self.parent.scalar(other)
        return NotImplemented

    def __hash__(self):
        return hash((self.parent.q, self.parent.k, self.value))

    def __lt__(self, other):
        return self.parent.key(self.value) < self.parent.key(other.value)

    def __bool__(self):
        return self.value != 0

    def __int__(self):
        return self.value

    def encode(self) -> str:
        return self.parent.encode(self.value)

    def __repr__(self):
        return f"F{self.parent.q}^{self.parent.k}({self.encode()})"


@lru_cache(maxsize=None)
def _make(q: int, k: int) -> ExtensionField:
    return ExtensionField(q, k, canonical_modulus(q, k))


def make_extension(q: int, k: int = 1, cap: int = DEFAULT_FIELD_CAP) -> ExtensionField:
    """The canonical F_{q^k}; identical objects for equal (q, k)."""
    if not isinstance(q, int) or not isprime(q):
        raise ParameterError(f"q={q} is not prime")
    if q < 5:
        raise ParameterError(f"q={q}: short Weierstrass models need q >= 5")
    if k < 1:
        raise ParameterError(f"k={k} must be at least 1")
    if q**k > cap:
        raise CapExceeded(f"field size {q}^{k} exceeds cap {cap}")
    return _make(q, k)


def embedding(small: ExtensionField, big: ExtensionField) -> list[int]:
    """Table sending each element of `small` to its image in `big` (small.k | big.k)."""
    if small.q != big.q or big.k % small.k:
        raise ParameterError("no embedding between these fields")
    if small.k == 1:
        return list(range(small.q))
    f = small.modulus
    root = None
    for z in big.canonical_order:
        acc = 0
        for c in reversed(f):
            acc = big.add(big.mul(acc, z), c)
        if acc == 0:
            root = z
            break
    powers = [1]
    for _ in range(small.k - 1):
        powers.append(big.mul(powers[-1], root))
    table = []
    for a in range(small.order):
        acc = 0
        for c, pw in zip(small.digits(a), powers):
            if c:
                acc = big.add(acc, big.mul(c, pw))
        table.append(acc)
    return table
