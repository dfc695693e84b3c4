"""Seifert matrices, Levine-Tristram signatures, Arf invariants, formal knots.

A FormalKnot is a connected sum of signed (r,1)-cables of base knots, tracked
at the level of the abelian invariants everything downstream consumes: the
signature function sigma(omega) and the Arf invariant.  sigma has two
independent evaluators that are cross-checked in tests: an exact hermitian
matrix path at prime-power roots of unity, and a jump-profile path for the
twist family with exact algebraic jump positions.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Optional, Sequence

from mpmath import mp

from .cyclo import compare_cos_turns, is_prime_power, zeta
from .witt import HermitianForm, diagonalize, signature

__all__ = [
    "Atom",
    "FormalKnot",
    "Jump",
    "SeifertMatrix",
    "SigmaEvaluation",
    "SigmaIntegral",
    "SignatureProfile",
    "arf",
    "integral_sigma",
    "omega_signature",
    "sigma",
    "sigma_details",
    "signature_profile",
    "twist_knot",
    "twist_matrix",
    "twist_parameter",
]


def _int_det(rows) -> int:
    """Fraction-free Bareiss determinant of an integer matrix."""
    n = len(rows)
    if n == 0:
        return 1
    m = [list(r) for r in rows]
    sign = 1
    prev = 1
    for k in range(n - 1):
        if m[k][k] == 0:
            swap = next((i for i in range(k + 1, n) if m[i][k]), None)
            if swap is None:
                return 0
            m[k], m[swap] = m[swap], m[k]
            sign = -sign
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                m[i][j] = (m[i][j] * m[k][k] - m[i][k] * m[k][j]) // prev
            m[i][k] = 0
        prev = m[k][k]
    return sign * m[-1][-1]


@dataclass(frozen=True)
class SeifertMatrix:
    """Square integer matrix A with det(A - A^T) = +-1."""

    rows: tuple

    @staticmethod
    def from_rows(rows: Sequence[Sequence[int]]) -> "SeifertMatrix":
        mat = tuple(tuple(int(v) for v in row) for row in rows)
        n = len(mat)
        for row in mat:
            if len(row) != n:
                raise ValueError("Seifert matrix must be square")
        skew = [[mat[i][j] - mat[j][i] for j in range(n)] for i in range(n)]
        det = _int_det(skew)
        if det not in (1, -1):
            raise ValueError(
                f"det(A - A^T) = {det}, not a unit: not a Seifert matrix of a knot")
        return SeifertMatrix(mat)

    @property
    def size(self) -> int:
        return len(self.rows)

    def to_json(self) -> list:
        return [list(row) for row in self.rows]

    @staticmethod
    def from_json(data) -> "SeifertMatrix":
        return SeifertMatrix.from_rows(data)


def twist_matrix(n: int) -> SeifertMatrix:
    """Seifert matrix [[-1,1],[0,-n]] of the n-twist family; n=1 is the trefoil."""
    if n < 1:
        raise ValueError(f"twist parameter must be >= 1, got {n}")
    return SeifertMatrix.from_rows([[-1, 1], [0, -n]])


def twist_parameter(matrix: SeifertMatrix) -> Optional[int]:
    """Recognize [[-1,1],[0,-n]] and return n, else None."""
    r = matrix.rows
    if len(r) == 2 and r[0] == (-1, 1) and r[1][0] == 0 and r[1][1] <= -1:
        return -r[1][1]
    return None


@dataclass(frozen=True)
class Atom:
    """One summand: sign * (cable,1)-cable of the knot with the given matrix."""

    matrix: SeifertMatrix
    cable: int = 1
    sign: int = 1

    def __post_init__(self):
        if self.cable < 1:
            raise ValueError(f"cable parameter must be >= 1, got {self.cable}")
        if self.sign not in (1, -1):
            raise ValueError(f"atom sign must be +-1, got {self.sign}")


@dataclass(frozen=True)
class FormalKnot:
    atoms: tuple = ()

    @staticmethod
    def of(*atoms: Atom) -> "FormalKnot":
        return FormalKnot(tuple(atoms))

    def __add__(self, other: "FormalKnot") -> "FormalKnot":
        return FormalKnot(self.atoms + other.atoms)

    def __neg__(self) -> "FormalKnot":
        return FormalKnot(tuple(
            Atom(a.matrix, a.cable, -a.sign) for a in self.atoms))

    def __sub__(self, other: "FormalKnot") -> "FormalKnot":
        return self + (-other)

    def mirror(self) -> "FormalKnot":
        return -self

    def cable(self, r: int) -> "FormalKnot":
        """(r,1)-cable: multiplies every atom's cable parameter by r."""
        if r < 1:
            raise ValueError(f"cable parameter must be >= 1, got {r}")
        return FormalKnot(tuple(
            Atom(a.matrix, a.cable * r, a.sign) for a in self.atoms))

    def to_json(self) -> list:
        out = []
        for a in self.atoms:
            n = twist_parameter(a.matrix)
            entry = {"r": a.cable, "sign": a.sign}
            if n is not None:
                entry["n"] = n
            else:
                entry["matrix"] = a.matrix.to_json()
            out.append(entry)
        return out

    @staticmethod
    def from_json(data) -> "FormalKnot":
        atoms = []
        for entry in data:
            if "n" in entry:
                matrix = twist_matrix(entry["n"])
            else:
                matrix = SeifertMatrix.from_json(entry["matrix"])
            atoms.append(Atom(matrix, entry.get("r", 1), entry.get("sign", 1)))
        return FormalKnot(tuple(atoms))


def twist_knot(n: int, cable: int = 1, sign: int = 1) -> FormalKnot:
    return FormalKnot.of(Atom(twist_matrix(n), cable, sign))


def _matrix_of(matrix) -> SeifertMatrix:
    if isinstance(matrix, SeifertMatrix):
        return matrix
    return SeifertMatrix.from_rows(matrix)


@lru_cache(maxsize=None)
def _omega_signature_cached(rows: tuple, d: int, s: int) -> int:
    if s == 0:
        return 0
    omega = zeta(d, s)
    omega_bar = omega.conj()
    one_minus = 1 - omega
    one_minus_bar = 1 - omega_bar
    n = len(rows)
    entries = [[one_minus * rows[i][j] + one_minus_bar * rows[j][i]
                for j in range(n)] for i in range(n)]
    diag = diagonalize(HermitianForm(d, tuple(tuple(row) for row in entries)))
    if diag.radical:
        # det(A - A^T) = +-1 forces the Alexander polynomial to be a unit at
        # every prime-power root of unity, so this cannot happen on valid input
        raise ArithmeticError(
            f"M(zeta_{d}^{s}) is singular for a valid Seifert matrix; "
            f"a nonsingularity invariant is violated")
    return signature(diag)


def omega_signature(matrix, d: int, s: int) -> int:
    """Signature of (1-w)A + (1-w^-1)A^T at w = zeta_d^s, exact.

    d must be a prime power; at such roots the matrix is never singular for a
    valid Seifert matrix, so no jump-averaging is ever needed on this path.
    """
    mat = _matrix_of(matrix)
    if not is_prime_power(d):
        raise ValueError(f"order {d} is not a prime power; "
                         f"use the profile path for other roots of unity")
    return _omega_signature_cached(mat.rows, d, s % d)


def _twist_cmp(n: int, x: Fraction) -> int:
    """Sign of t_n - x, where t_n = arccos((2n-1)/(2n)) / (2 pi)."""
    if n == 1:
        t = Fraction(1, 6)
        return (t > x) - (t < x)
    if x <= 0:
        return 1
    if 2 * x >= 1:
        return -1
    # both angles in (0, pi) where cos is strictly decreasing
    return -compare_cos_turns(Fraction(2 * n - 1, 2 * n), x)


@dataclass(frozen=True)
class Jump:
    """One signature jump of a cabled twist atom, at an exact algebraic angle.

    The position in turns is (k + t_n)/cable for branch +1 and
    (k + 1 - t_n)/cable for branch -1, with t_n = arccos((2n-1)/(2n))/(2 pi).
    """

    n: int
    cable: int
    k: int
    branch: int
    height: int

    def rational_position(self) -> Optional[Fraction]:
        if self.n != 1:
            return None
        if self.branch > 0:
            return Fraction(6 * self.k + 1, 6 * self.cable)
        return Fraction(6 * self.k + 5, 6 * self.cable)

    def compare_to_turn(self, u: Fraction) -> int:
        """Sign of (position - u), certified."""
        pos = self.rational_position()
        if pos is not None:
            return (pos > u) - (pos < u)
        x = u * self.cable - self.k
        if self.branch > 0:
            return _twist_cmp(self.n, x)
        return -_twist_cmp(self.n, 1 - x)

    def position_approx(self) -> float:
        theta = math.acos((2 * self.n - 1) / (2 * self.n)) / (2 * math.pi)
        delta = theta if self.branch > 0 else 1 - theta
        return (self.k + delta) / self.cable

    def to_json(self) -> dict:
        return {"n": self.n, "cable": self.cable, "k": self.k,
                "branch": self.branch, "height": self.height,
                "position_turns_approx": self.position_approx()}


@dataclass(frozen=True)
class SigmaIntegral:
    """Exact value pi_coeff * pi + sum coeff * arccos(c) of the sigma integral.

    Zero testing is structural (all coefficients zero); this is sufficient for
    the cancellations arising from mirrors and cables, where terms cancel
    symbol by symbol, and is not claimed to detect every hidden relation
    between arccos values of different rationals.
    """

    pi_coeff: Fraction = Fraction(0)
    arccos_terms: tuple = ()  # sorted pairs (c, coeff), c = cos of the angle

    def __add__(self, other: "SigmaIntegral") -> "SigmaIntegral":
        terms = dict(self.arccos_terms)
        for c, coeff in other.arccos_terms:
            terms[c] = terms.get(c, Fraction(0)) + coeff
        cleaned = tuple(sorted((c, v) for c, v in terms.items() if v))
        return SigmaIntegral(self.pi_coeff + other.pi_coeff, cleaned)

    def __neg__(self) -> "SigmaIntegral":
        return SigmaIntegral(-self.pi_coeff,
                             tuple((c, -v) for c, v in self.arccos_terms))

    def is_zero(self) -> bool:
        return not self.pi_coeff and not self.arccos_terms

    def value(self, dps: int = 30):
        old = mp.dps
        try:
            mp.dps = dps
            acc = self.pi_coeff * mp.pi
            for c, coeff in self.arccos_terms:
                acc += coeff * mp.acos(mp.mpf(c.numerator) / c.denominator)
            return acc
        finally:
            mp.dps = old

    def to_json(self) -> dict:
        return {"pi_coeff": str(self.pi_coeff),
                "arccos_terms": [[str(c), str(v)] for c, v in self.arccos_terms],
                "value_approx": float(self.value())}


@dataclass(frozen=True)
class SignatureProfile:
    """Piecewise-constant sigma as a merged list of exact jumps on [0, 1)."""

    jumps: tuple

    def evaluate(self, u: Fraction) -> tuple:
        """(sigma value at turn u, at_jump flag); the value at a jump is the
        average of the one-sided limits, an integer since heights are even."""
        u = Fraction(u) % 1
        below = 0
        at = 0
        for j in self.jumps:
            c = j.compare_to_turn(u)
            if c < 0:
                below += j.height
            elif c == 0:
                at += j.height
        return below + at // 2, at != 0

    def integral(self) -> SigmaIntegral:
        """Integral over the circle: sum of height * (2 pi - angle) per jump."""
        total = SigmaIntegral()
        for j in self.jumps:
            h, c, k = Fraction(j.height), j.cable, j.k
            pi_coeff = 2 * h - 2 * h * k / c
            cos_val = Fraction(2 * j.n - 1, 2 * j.n)
            if j.branch > 0:
                arc = -h / c
            else:
                pi_coeff -= 2 * h / c
                arc = h / c
            if j.n == 1:  # arccos(1/2) = pi/3 folds into the pi coefficient
                term = SigmaIntegral(pi_coeff + arc / 3)
            else:
                term = SigmaIntegral(pi_coeff, ((cos_val, arc),))
            total = total + term
        return total

    def to_json(self) -> list:
        return [j.to_json() for j in self.jumps]


def signature_profile(knot: FormalKnot) -> SignatureProfile:
    """Exact jump list of a twist-family FormalKnot, merged and cancelled."""
    merged = {}
    for atom in knot.atoms:
        n = twist_parameter(atom.matrix)
        if n is None:
            raise ValueError(
                "profile path supports twist-family atoms only; evaluate other "
                "matrices through the matrix path (omega_signature)")
        for k in range(atom.cable):
            for branch, height in ((1, -2 * atom.sign), (-1, 2 * atom.sign)):
                jump = Jump(n, atom.cable, k, branch, height)
                pos = jump.rational_position()
                key = ("q", pos) if pos is not None else ("a", n, atom.cable, k, branch)
                if key in merged:
                    old = merged[key]
                    merged[key] = Jump(old.n, old.cable, old.k, old.branch,
                                       old.height + height)
                else:
                    merged[key] = jump
    jumps = tuple(sorted((j for j in merged.values() if j.height),
                         key=lambda j: (j.position_approx(), j.n, j.cable,
                                        j.k, j.branch)))
    return SignatureProfile(jumps)


@dataclass(frozen=True)
class SigmaEvaluation:
    value: int
    at_jump: bool
    path: str


def sigma_details(knot: FormalKnot, d: int, s: int) -> SigmaEvaluation:
    """Evaluate sigma at omega = zeta_d^s, exactly, by whichever path applies.

    The exponent is reduced first, so any (d, s) with prime-power reduced
    denominator take the matrix path; other roots need twist-family atoms.
    """
    if d < 1:
        raise ValueError(f"root order must be positive, got {d}")
    u = Fraction(s % d, d)
    if u == 0:
        return SigmaEvaluation(0, False, "trivial")
    if is_prime_power(u.denominator):
        total = 0
        for atom in knot.atoms:
            ua = Fraction((s * atom.cable) % d, d)
            if ua == 0:
                continue
            # denominators of cable multiples divide the reduced denominator,
            # so they stay prime powers
            total += atom.sign * omega_signature(atom.matrix, ua.denominator,
                                                 ua.numerator)
        return SigmaEvaluation(total, False, "matrix")
    value, at_jump = signature_profile(knot).evaluate(u)
    return SigmaEvaluation(value, at_jump, "profile")


def sigma(knot: FormalKnot, d: int, s: int) -> int:
    return sigma_details(knot, d, s).value


def integral_sigma(knot: FormalKnot) -> SigmaIntegral:
    return signature_profile(knot).integral()


def arf(knot: FormalKnot) -> int:
    """Arf invariant in Z_2 via Delta(-1) mod 8, additive over atoms.

    The cabled Alexander polynomial is Delta_base(t^r), so even cables
    contribute Delta_base(1) = +-1, hence 0; odd cables contribute the base
    value det(A + A^T) mod 8.
    """
    total = 0
    for atom in knot.atoms:
        if atom.cable % 2 == 0:
            continue
        rows = atom.matrix.rows
        n = len(rows)
        doubled = [[rows[i][j] + rows[j][i] for j in range(n)] for i in range(n)]
        if _int_det(doubled) % 8 not in (1, 7):
            total += 1
    return total % 2
