"""Exact arithmetic in Q(zeta_d) for prime-power d, with certified signs.

Elements are coefficient vectors over the power basis 1, z, ..., z^(phi(d)-1)
reduced modulo the cyclotomic polynomial Phi_d, so equality and zero testing
are exact syntactic checks on rational vectors.  The sign of an element fixed
by the involution z -> z^-1, under the embedding z -> exp(2*pi*i*s/d), is
decided by adaptive-precision interval arithmetic: exact zeros short-circuit,
and a nonzero element is separated from zero at some finite precision.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from math import gcd
from typing import Union

from mpmath import iv

__all__ = [
    "CyclotomicNumber",
    "PrecisionExhausted",
    "certified_sign",
    "compare_cos_turns",
    "degree_of",
    "is_prime_power",
    "prime_power_split",
    "set_precision_cap",
    "zeta",
]

START_PRECISION = 64
_precision_cap = 1 << 16

Scalar = Union[int, Fraction]


class PrecisionExhausted(ArithmeticError):
    """Interval refinement hit the precision cap without separating a sign."""


def set_precision_cap(bits: int) -> int:
    """Set the hard precision cap (in bits) and return the previous value."""
    global _precision_cap
    if bits < START_PRECISION:
        raise ValueError(f"precision cap {bits} below starting precision {START_PRECISION}")
    old = _precision_cap
    _precision_cap = bits
    return old


def prime_power_split(d: int):
    """Return (p, a) with d = p**a, or None if d is not a prime power >= 2."""
    if d < 2:
        return None
    p = None
    for q in range(2, d + 1):
        if q * q > d:
            p = d
            break
        if d % q == 0:
            p = q
            break
    n, a = d, 0
    while n % p == 0:
        n //= p
        a += 1
    return (p, a) if n == 1 else None


def is_prime_power(d: int) -> bool:
    return prime_power_split(d) is not None


@lru_cache(maxsize=None)
def _field_params(d: int):
    split = prime_power_split(d)
    if split is None:
        raise ValueError(f"order {d} is not a prime power")
    p, a = split
    m = p ** (a - 1)
    return p, a, m, (p - 1) * m


def degree_of(d: int) -> int:
    """Degree phi(d) of Q(zeta_d) over Q for prime-power d."""
    return _field_params(d)[3]


def _reduce(vec, d: int):
    # Phi_{p^a}(x) = sum_{j<p} x^(j*m) with m = p^(a-1), so
    # x^phi = -sum_{j<p-1} x^(j*m) rewrites one top coefficient at a time.
    p, _, m, phi = _field_params(d)
    for i in range(len(vec) - 1, phi - 1, -1):
        c = vec[i]
        if c:
            vec[i] = Fraction(0)
            base = i - phi
            for j in range(p - 1):
                vec[base + j * m] -= c
    del vec[phi:]
    while len(vec) < phi:
        vec.append(Fraction(0))
    return vec


def _poly_trim(a):
    while a and not a[-1]:
        a.pop()
    return a


def _poly_divmod(a, b):
    a = list(a)
    q = [Fraction(0)] * max(1, len(a) - len(b) + 1)
    inv_lead = 1 / b[-1]
    for i in range(len(a) - len(b), -1, -1):
        c = a[i + len(b) - 1] * inv_lead
        if c:
            q[i] = c
            for j, bj in enumerate(b):
                a[i + j] -= c * bj
    return _poly_trim(q), _poly_trim(a)


def _poly_mul(a, b):
    out = [Fraction(0)] * (len(a) + len(b) - 1)
    for i, ai in enumerate(a):
        if ai:
            for j, bj in enumerate(b):
                out[i + j] += ai * bj
    return _poly_trim(out)


def _poly_sub(a, b):
    out = list(a) + [Fraction(0)] * (len(b) - len(a))
    for j, bj in enumerate(b):
        out[j] -= bj
    return _poly_trim(out)


def _phi_poly(d: int):
    p, _, m, phi = _field_params(d)
    coeffs = [Fraction(0)] * (phi + 1)
    for j in range(p):
        coeffs[j * m] = Fraction(1)
    return coeffs


def _invert_mod_phi(a, d: int):
    # extended Euclid in Q[x]; Phi_d is irreducible so any nonzero a is a unit.
    phi_poly = _phi_poly(d)
    r0, r1 = phi_poly, _poly_trim(list(a))
    s0, s1 = [], [Fraction(1)]
    while r1:
        q, r = _poly_divmod(r0, r1)
        r0, r1 = r1, r
        s0, s1 = s1, _poly_sub(s0, _poly_mul(q, s1))
    # r0 = gcd = nonzero constant; s0 * a == r0 (mod Phi_d)
    c = r0[0]
    return [x / c for x in s0]


def _coerce(value: Scalar) -> Fraction:
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    raise TypeError(f"cannot coerce {type(value).__name__} into Q(zeta_d)")


@dataclass(frozen=True)
class CyclotomicNumber:
    """An element of Q(zeta_d), d a prime power, in the reduced power basis."""

    order: int
    coeffs: tuple

    @staticmethod
    def from_coeffs(d: int, coeffs) -> "CyclotomicNumber":
        vec = [_coerce(c) for c in coeffs]
        if len(vec) > degree_of(d):
            vec = _reduce(vec, d)
        else:
            vec += [Fraction(0)] * (degree_of(d) - len(vec))
        return CyclotomicNumber(d, tuple(vec))

    @staticmethod
    def of(d: int, value: Scalar) -> "CyclotomicNumber":
        return CyclotomicNumber.from_coeffs(d, [_coerce(value)])

    def _check_same_field(self, other: "CyclotomicNumber"):
        if self.order != other.order:
            raise ValueError(
                f"mixed cyclotomic orders {self.order} and {other.order}; embed explicitly"
            )

    def _lift(self, other):
        if isinstance(other, CyclotomicNumber):
            self._check_same_field(other)
            return other
        return CyclotomicNumber.of(self.order, _coerce(other))

    def __add__(self, other):
        try:
            other = self._lift(other)
        except TypeError:
            return NotImplemented
        return CyclotomicNumber(
            self.order, tuple(a + b for a, b in zip(self.coeffs, other.coeffs))
        )

    __radd__ = __add__

    def __neg__(self):
        return CyclotomicNumber(self.order, tuple(-a for a in self.coeffs))

    def __sub__(self, other):
        try:
            other = self._lift(other)
        except TypeError:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        try:
            other = self._lift(other)
        except TypeError:
            return NotImplemented
        out = [Fraction(0)] * (2 * len(self.coeffs) - 1)
        for i, a in enumerate(self.coeffs):
            if a:
                for j, b in enumerate(other.coeffs):
                    if b:
                        out[i + j] += a * b
        return CyclotomicNumber(self.order, tuple(_reduce(out, self.order)))

    __rmul__ = __mul__

    def inverse(self) -> "CyclotomicNumber":
        if self.is_zero():
            raise ZeroDivisionError(f"division by zero in Q(zeta_{self.order})")
        inv = _invert_mod_phi(self.coeffs, self.order)
        inv += [Fraction(0)] * (len(self.coeffs) - len(inv))
        return CyclotomicNumber(self.order, tuple(inv))

    def __truediv__(self, other):
        try:
            other = self._lift(other)
        except TypeError:
            return NotImplemented
        return self * other.inverse()

    def __rtruediv__(self, other):
        return self.inverse() * other

    def __pow__(self, n: int):
        if n < 0:
            return self.inverse() ** (-n)
        result = CyclotomicNumber.of(self.order, 1)
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    def conj(self) -> "CyclotomicNumber":
        """Image under the involution zeta -> zeta^-1."""
        d = self.order
        vec = [Fraction(0)] * d
        for k, c in enumerate(self.coeffs):
            if c:
                vec[(-k) % d] += c
        return CyclotomicNumber(d, tuple(_reduce(vec, d)))

    def is_zero(self) -> bool:
        return not any(self.coeffs)

    def is_rational(self) -> bool:
        return not any(self.coeffs[1:])

    def rational_value(self) -> Fraction:
        if not self.is_rational():
            raise ValueError("element is not rational")
        return self.coeffs[0]

    def is_real(self) -> bool:
        return self == self.conj()

    def __eq__(self, other):
        if isinstance(other, CyclotomicNumber):
            return self.order == other.order and self.coeffs == other.coeffs
        if isinstance(other, (int, Fraction)):
            return self.is_rational() and self.coeffs[0] == other
        return NotImplemented

    def __hash__(self):
        return hash((self.order, self.coeffs))

    def __repr__(self):
        terms = []
        for k, c in enumerate(self.coeffs):
            if not c:
                continue
            if k == 0:
                terms.append(str(c))
            else:
                mono = "z" if k == 1 else f"z^{k}"
                terms.append(mono if c == 1 else f"{c}*{mono}")
        body = " + ".join(terms) if terms else "0"
        return f"<{body} in Q(zeta_{self.order})>"


def zeta(d: int, k: int = 1) -> CyclotomicNumber:
    """The root of unity zeta_d**k as an element of Q(zeta_d)."""
    k %= d
    vec = [Fraction(0)] * (k + 1)
    vec[k] = Fraction(1)
    return CyclotomicNumber.from_coeffs(d, vec)


class _prec:
    """Temporarily set the interval context precision."""

    def __init__(self, bits):
        self.bits = bits

    def __enter__(self):
        self.old = iv.prec
        iv.prec = self.bits

    def __exit__(self, *exc):
        iv.prec = self.old


@lru_cache(maxsize=None)
def _cos_table(d: int, prec: int):
    with _prec(prec):
        two_pi = 2 * iv.pi
        return tuple(iv.cos(two_pi * k / d) for k in range(d))


def _embed_interval(x: CyclotomicNumber, s: int, prec: int):
    # For x fixed by the involution the embedded value is real and equals
    # sum_k c_k cos(2*pi*k*s/d).
    table = _cos_table(x.order, prec)
    with _prec(prec):
        acc = iv.mpf(0)
        for k, c in enumerate(x.coeffs):
            if c:
                acc += (iv.mpf(c.numerator) / c.denominator) * table[(k * s) % x.order]
        return acc


def embedding_interval(x: CyclotomicNumber, s: int, prec: int):
    """Interval enclosure (as an mpmath iv.mpf) of x under zeta -> e^(2 pi i s/d)."""
    if not x.is_real():
        raise ValueError("interval enclosure is only provided for real elements")
    return _embed_interval(x, s, prec)


def certified_sign(x: CyclotomicNumber, embedding: int = 1) -> int:
    """Sign in {-1, 0, 1} of a real element under zeta -> e^(2 pi i s/d).

    Exact zero short-circuits before any numeric work; otherwise the interval
    enclosure is refined (doubling precision from 64 bits) until it separates
    from zero, which must happen for a nonzero algebraic number.
    """
    d = x.order
    if gcd(embedding, d) != 1:
        raise ValueError(f"embedding exponent {embedding} not coprime to {d}")
    if not x.is_real():
        raise ValueError("sign is only defined for elements fixed by the involution")
    if x.is_zero():
        return 0
    prec = START_PRECISION
    while prec <= _precision_cap:
        box = _embed_interval(x, embedding, prec)
        if box.a > 0:
            return 1
        if box.b < 0:
            return -1
        prec *= 2
    raise PrecisionExhausted(
        f"could not separate sign of {x!r} at embedding {embedding} "
        f"within {_precision_cap} bits"
    )


# angles 2*pi*u with rational cosine (Niven): cos is rational only at these u.
_RATIONAL_COS = {
    Fraction(0): Fraction(1),
    Fraction(1, 6): Fraction(1, 2),
    Fraction(1, 4): Fraction(0),
    Fraction(1, 3): Fraction(-1, 2),
    Fraction(1, 2): Fraction(-1),
    Fraction(2, 3): Fraction(-1, 2),
    Fraction(3, 4): Fraction(0),
    Fraction(5, 6): Fraction(1, 2),
}


def compare_cos_turns(c, u) -> int:
    """Certified sign of c - cos(2*pi*u) for exact rationals c and u.

    At the eight angles where cos(2*pi*u) is rational the comparison is exact;
    everywhere else cos(2*pi*u) is irrational, so interval refinement always
    terminates.
    """
    c = _coerce(c)
    u = _coerce(u) % 1
    exact = _RATIONAL_COS.get(u)
    if exact is not None:
        diff = c - exact
        return (diff > 0) - (diff < 0)
    if c >= 1:
        return 1
    if c <= -1:
        return -1
    prec = START_PRECISION
    while prec <= _precision_cap:
        with _prec(prec):
            box = iv.cos(2 * iv.pi * u.numerator / u.denominator)
            lo = iv.mpf(c.numerator) / c.denominator - box
        if lo.a > 0:
            return 1
        if lo.b < 0:
            return -1
        prec *= 2
    raise PrecisionExhausted(f"could not compare {c} with cos(2*pi*{u})")
