"""Witt-class invariants of hermitian forms over Q(zeta_d) and Hilbert symbols.

Forms are diagonalized by exact congruence (the radical split off first), and a
class is represented by its invariant tuple: signatures at the real embedding
classes, rank parity of the nonsingular part, and the discriminant
disc = (-1)^(k(k-1)/2) det in the real subfield modulo norms.  For d = 4 the
norm subgroup of Q^x is computable (positive, even valuation at primes = 3 mod
4), so discriminants reduce to a finite exact datum there; separating classes
rationally uses the Hilbert symbols (disc, -1)_q.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import gcd
from typing import Optional, Sequence, Union

from .cyclo import CyclotomicNumber, certified_sign, zeta

__all__ = [
    "DiscClass",
    "HermitianForm",
    "LambdaBlockSpec",
    "WittClass",
    "diagonalize",
    "embeddings",
    "hilbert_symbol",
    "lambda_block",
    "signature",
    "witt_add",
    "witt_invariants",
    "witt_neg",
    "witt_zero",
]

Entry = Union[int, Fraction, CyclotomicNumber]


def _entry(d: int, value: Entry) -> CyclotomicNumber:
    if isinstance(value, CyclotomicNumber):
        if value.order != d:
            raise ValueError(f"entry order {value.order} does not match form order {d}")
        return value
    return CyclotomicNumber.of(d, value)


@dataclass(frozen=True)
class HermitianForm:
    """A hermitian matrix over Q(zeta_d) with respect to zeta -> zeta^-1."""

    order: int
    entries: tuple

    @staticmethod
    def from_rows(d: int, rows: Sequence[Sequence[Entry]]) -> "HermitianForm":
        mat = tuple(tuple(_entry(d, v) for v in row) for row in rows)
        n = len(mat)
        for row in mat:
            if len(row) != n:
                raise ValueError("hermitian form must be square")
        for i in range(n):
            for j in range(i, n):
                if mat[i][j] != mat[j][i].conj():
                    raise ValueError(f"matrix is not conjugate-symmetric at ({i},{j})")
        return HermitianForm(d, mat)

    @property
    def size(self) -> int:
        return len(self.entries)


@dataclass(frozen=True)
class Diagonalization:
    """Congruence T* F T = diag(pivots) + zero block of dimension radical."""

    order: int
    pivots: tuple
    radical: int
    transform: tuple


def _zero(d: int) -> CyclotomicNumber:
    return CyclotomicNumber.of(d, 0)


def diagonalize(form: HermitianForm) -> Diagonalization:
    """Exact hermitian diagonalization with the radical split off.

    The recorded transform satisfies transform* . F . transform equal to the
    diagonal of pivots followed by a zero block, verified exactly in tests.
    """
    d = form.order
    n = form.size
    work = [list(row) for row in form.entries]
    trans = [[_zero(d) for _ in range(n)] for _ in range(n)]
    for i in range(n):
        trans[i][i] = CyclotomicNumber.of(d, 1)

    def col_swap(a, b):
        for row in work:
            row[a], row[b] = row[b], row[a]
        work[a], work[b] = work[b], work[a]
        for row in trans:
            row[a], row[b] = row[b], row[a]

    def col_add(dst, src, coef):
        # basis change v_dst += coef * v_src, applied to both slots of the form
        cc = coef.conj()
        for row in work:
            row[dst] = row[dst] + row[src] * coef
        work[dst] = [work[dst][j] + cc * work[src][j] for j in range(n)]
        for row in trans:
            row[dst] = row[dst] + row[src] * coef

    pivots = []
    i = 0
    while i < n:
        pivot_at = next((j for j in range(i, n) if not work[j][j].is_zero()), None)
        if pivot_at is None:
            off = next(((j, k) for j in range(i, n) for k in range(j + 1, n)
                        if not work[j][k].is_zero()), None)
            if off is None:
                break  # remaining block is the radical
            j, k = off
            a = work[j][k]
            if not (a + a.conj()).is_zero():
                coef = CyclotomicNumber.of(d, 1)
            else:
                # a is purely imaginary; zeta - zeta^-1 is nonzero for d > 2
                coef = zeta(d)
            col_add(j, k, coef)
            pivot_at = j
        if pivot_at != i:
            col_swap(i, pivot_at)
        p = work[i][i]
        for j in range(i + 1, n):
            if not work[i][j].is_zero():
                col_add(j, i, -(work[i][j] / p))
        pivots.append(p)
        i += 1
    return Diagonalization(d, tuple(pivots), n - len(pivots),
                           tuple(tuple(row) for row in trans))


def embeddings(d: int) -> tuple:
    """Real embedding classes: exponents s coprime to d with 0 < s < d/2.

    Conjugate embeddings s and d-s give equal signatures, so one per pair; for
    d <= 2 the field is already real and the single class is s = 1.
    """
    if d <= 2:
        return (1,)
    return tuple(s for s in range(1, (d + 1) // 2) if gcd(s, d) == 1)


def signature(form_or_diag, s: int = 1) -> int:
    """Signature at the embedding zeta -> e^(2 pi i s/d), certified pivot signs."""
    diag = form_or_diag if isinstance(form_or_diag, Diagonalization) else diagonalize(form_or_diag)
    return sum(certified_sign(p, s) for p in diag.pivots)


def _factor(n: int) -> dict:
    out = {}
    q = 2
    while q * q <= n:
        while n % q == 0:
            out[q] = out.get(q, 0) + 1
            n //= q
        q += 1 if q == 2 else 2
    if n > 1:
        out[n] = out.get(n, 0) + 1
    return out


def _fraction_factor(x: Fraction) -> dict:
    out = _factor(x.numerator if x > 0 else -x.numerator)
    for q, e in _factor(x.denominator).items():
        out[q] = out.get(q, 0) - e
    return out


@dataclass(frozen=True)
class DiscClass:
    """Discriminant class in Q^x modulo norms from Q(zeta_4).

    Norms are exactly the positive rationals with even valuation at every prime
    congruent to 3 mod 4 (2 and primes = 1 mod 4 are norms), so the class is a
    sign together with the set of odd-valuation primes = 3 mod 4.
    """

    sign: int
    primes: frozenset

    @staticmethod
    def of(x: Fraction) -> "DiscClass":
        if x == 0:
            raise ValueError("discriminant of a nonsingular form cannot vanish")
        odd = frozenset(q for q, e in _fraction_factor(x).items()
                        if q % 4 == 3 and e % 2 == 1)
        return DiscClass(1 if x > 0 else -1, odd)

    def __mul__(self, other: "DiscClass") -> "DiscClass":
        return DiscClass(self.sign * other.sign, self.primes ^ other.primes)

    def is_trivial(self) -> bool:
        return self.sign == 1 and not self.primes

    def representative(self) -> Fraction:
        r = Fraction(self.sign)
        for q in self.primes:
            r *= q
        return r


@dataclass(frozen=True)
class WittClass:
    """Invariant tuple of a hermitian form: the data the Witt class determines.

    `disc` is an exact real-subfield representative (None when unavailable, see
    `partial`); `disc_class` is its finite reduction for d = 4.  The tuple
    composes under orthogonal sum via witt_add/witt_neg, with
    disc(F1 + F2) = (-1)^(k1 k2) disc(F1) disc(F2).
    """

    order: int
    rank_mod_2: int
    signatures: tuple  # pairs (s, signature)
    disc: Optional[CyclotomicNumber] = None
    disc_class: Optional[DiscClass] = None
    diagonal: tuple = ()
    radical: int = 0
    partial: bool = False  # True when only signatures are carried

    def signature_at(self, s: int) -> int:
        for e, v in self.signatures:
            if e == s:
                return v
        raise KeyError(f"no embedding class {s} for order {self.order}")

    @property
    def sign(self) -> int:
        """Signature at the standard embedding zeta -> e^(2 pi i/d)."""
        return self.signature_at(1)

    def is_trivial(self) -> bool:
        if any(v for _, v in self.signatures) or self.rank_mod_2:
            return False
        if self.partial:
            return False
        if self.disc_class is not None:
            return self.disc_class.is_trivial()
        return self.disc == 1

    def to_json(self) -> dict:
        out = {
            "order": self.order,
            "rank_mod_2": self.rank_mod_2,
            "signatures": {str(s): v for s, v in self.signatures},
            "radical": self.radical,
            "partial": self.partial,
        }
        if self.disc is not None:
            out["disc_coeffs"] = [str(c) for c in self.disc.coeffs]
        if self.disc_class is not None:
            out["disc_class"] = {
                "sign": self.disc_class.sign,
                "primes": sorted(self.disc_class.primes),
            }
        return out


def witt_invariants(form: HermitianForm) -> WittClass:
    """Diagonalize and read off the invariant tuple of the nonsingular part."""
    diag = diagonalize(form)
    d = form.order
    k = len(diag.pivots)
    sigs = tuple((s, sum(certified_sign(p, s) for p in diag.pivots))
                 for s in embeddings(d))
    disc = CyclotomicNumber.of(d, (-1) ** (k * (k - 1) // 2))
    for p in diag.pivots:
        disc = disc * p
    disc_class = None
    if d == 4:
        disc_class = DiscClass.of(disc.rational_value())
    return WittClass(order=d, rank_mod_2=k % 2, signatures=sigs, disc=disc,
                     disc_class=disc_class, diagonal=diag.pivots, radical=diag.radical)


def witt_zero(d: int) -> WittClass:
    return WittClass(order=d, rank_mod_2=0,
                     signatures=tuple((s, 0) for s in embeddings(d)),
                     disc=CyclotomicNumber.of(d, 1),
                     disc_class=DiscClass(1, frozenset()) if d == 4 else None)


def witt_add(a: WittClass, b: WittClass) -> WittClass:
    if a.order != b.order:
        raise ValueError(f"cannot add Witt classes of orders {a.order} and {b.order}")
    sigs = tuple((s, va + vb) for (s, va), (_, vb) in zip(a.signatures, b.signatures))
    partial = a.partial or b.partial
    disc = disc_class = None
    if not partial:
        twist = (-1) ** (a.rank_mod_2 * b.rank_mod_2)
        disc = a.disc * b.disc * twist
        if a.disc_class is not None and b.disc_class is not None:
            disc_class = a.disc_class * b.disc_class
            if twist < 0:
                disc_class = DiscClass(-1, frozenset()) * disc_class
    return WittClass(order=a.order, rank_mod_2=(a.rank_mod_2 + b.rank_mod_2) % 2,
                     signatures=sigs, disc=disc, disc_class=disc_class,
                     diagonal=a.diagonal + b.diagonal, partial=partial)


def witt_neg(a: WittClass) -> WittClass:
    sigs = tuple((s, -v) for s, v in a.signatures)
    disc = disc_class = None
    if not a.partial:
        twist = (-1) ** a.rank_mod_2  # det(-F) = (-1)^k det(F)
        disc = a.disc * twist
        if a.disc_class is not None:
            disc_class = a.disc_class
            if twist < 0:
                disc_class = DiscClass(-1, frozenset()) * disc_class
    return WittClass(order=a.order, rank_mod_2=a.rank_mod_2, signatures=sigs,
                     disc=disc, disc_class=disc_class,
                     diagonal=tuple(-p for p in a.diagonal), partial=a.partial)


def _legendre(a: int, q: int) -> int:
    a %= q
    if a == 0:
        return 0
    t = pow(a, (q - 1) // 2, q)
    return 1 if t == 1 else -1


def _split_valuation(n: int, q: int):
    v = 0
    while n % q == 0:
        n //= q
        v += 1
    return v, n


def hilbert_symbol(a, b, q) -> int:
    """Hilbert symbol (a, b)_q over Q_q, with q a prime or the string "inf".

    Classical closed forms: for odd q, (a,b)_q = (-1)^(alpha beta eps(q))
    (u|q)^beta (v|q)^alpha with a = q^alpha u, b = q^beta v; for q = 2 the
    (-1)^(eps(u)eps(v) + alpha omega(v) + beta omega(u)) formula; at the real
    place -1 iff both arguments are negative.
    """
    a = Fraction(a)
    b = Fraction(b)
    if a == 0 or b == 0:
        raise ValueError("hilbert symbol requires nonzero arguments")
    # (a,b) depends on square classes; clear denominators
    ai = a.numerator * a.denominator
    bi = b.numerator * b.denominator
    if q == "inf":
        return -1 if (ai < 0 and bi < 0) else 1
    if not isinstance(q, int) or q < 2 or _factor(q) != {q: 1}:
        raise ValueError(f"place must be a prime or 'inf', got {q!r}")
    sa, sb = (1 if ai > 0 else -1), (1 if bi > 0 else -1)
    alpha, u = _split_valuation(abs(ai), q)
    beta, v = _split_valuation(abs(bi), q)
    u *= sa
    v *= sb
    if q == 2:
        eps_u, eps_v = ((u - 1) // 2) % 2, ((v - 1) // 2) % 2
        om_u, om_v = ((u * u - 1) // 8) % 2, ((v * v - 1) // 8) % 2
        e = eps_u * eps_v + alpha * om_v + beta * om_u
        return -1 if e % 2 else 1
    eps = ((q - 1) // 2) % 2
    result = (-1) ** (alpha * beta * eps)
    if beta % 2:
        result *= _legendre(u, q)
    if alpha % 2:
        result *= _legendre(v, q)
    return result


def _matrix_rows(A) -> tuple:
    rows = getattr(A, "rows", A)
    return tuple(tuple(int(v) for v in row) for row in rows)


@dataclass(frozen=True)
class LambdaBlockSpec:
    """Inputs of the block form: an integer matrix A, block count r, root zeta_d^t."""

    matrix: tuple
    r: int
    d: int
    t: int = 1

    def __post_init__(self):
        object.__setattr__(self, "matrix", _matrix_rows(self.matrix))
        if self.r < 1:
            raise ValueError(f"block count r must be positive, got {self.r}")

    def form(self) -> "HermitianForm":
        return lambda_block(self.matrix, self.r, self.d, self.t)


def lambda_block(A, r: int, d: int, t: int) -> HermitianForm:
    """The r x r block hermitian form of an integer Seifert-type matrix.

    Blocks: A + A^T on the diagonal, -A on the superdiagonal, -A^T on the
    subdiagonal, and the wraparound entries twisted by omega = zeta_d^t:
    -omega^-1 A^T in the top-right corner and -omega A in the bottom-left.
    For r = 1 everything lands in the single block, giving
    (1-omega)A + (1-omega^-1)A^T.
    """
    if r < 1:
        raise ValueError(f"block count r must be positive, got {r}")
    rows = _matrix_rows(A)
    g = len(rows)
    if any(len(row) != g for row in rows):
        raise ValueError("matrix must be square")
    omega = zeta(d, t % d)
    omega_bar = omega.conj()
    one = CyclotomicNumber.of(d, 1)
    n = r * g
    out = [[_zero(d) for _ in range(n)] for _ in range(n)]

    def add_block(bi, bj, scale, transpose):
        for x in range(g):
            for y in range(g):
                v = rows[y][x] if transpose else rows[x][y]
                if v:
                    out[bi * g + x][bj * g + y] = out[bi * g + x][bj * g + y] + scale * v

    # superdiagonal family (i, i+1 mod r): -A, with wrap factor omega at the
    # bottom-left; subdiagonal family (i, i-1 mod r): -A^T, with wrap factor
    # omega^-1 at the top-right.  For r = 1 both wrap onto the diagonal.
    for i in range(r):
        add_block(i, i, one, False)
        add_block(i, i, one, True)
        j = (i + 1) % r
        scale = -omega if j <= i else -one
        add_block(i, j, scale, False)
        j = (i - 1) % r
        scale = -omega_bar if j >= i else -one
        add_block(i, j, scale, True)
    return HermitianForm.from_rows(d, out)
