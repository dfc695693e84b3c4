"""Tests for Seifert matrices, signature functions, profiles, Arf invariants."""
import math
import random
from fractions import Fraction
from itertools import product

import numpy as np
import pytest

from lambdatower.seifert import (
    Atom,
    FormalKnot,
    SeifertMatrix,
    arf,
    integral_sigma,
    omega_signature,
    sigma,
    sigma_details,
    signature_profile,
    twist_knot,
    twist_matrix,
    twist_parameter,
)

TREFOIL = twist_knot(1)


def random_seifert(rng: random.Random, g: int) -> SeifertMatrix:
    """Random valid Seifert matrix: free upper part over a symplectic A - A^T."""
    n = 2 * g
    skew = [[0] * n for _ in range(n)]
    for i in range(0, n, 2):
        skew[i][i + 1] = 1
        skew[i + 1][i] = -1
    a = [[0] * n for _ in range(n)]
    for i in range(n):
        a[i][i] = rng.randint(-3, 3)
        for j in range(i + 1, n):
            a[i][j] = rng.randint(-3, 3)
            a[j][i] = a[i][j] - skew[i][j]
    return SeifertMatrix.from_rows(a)


def random_twist_knot(rng: random.Random, atoms: int, n_max: int = 8,
                      r_max: int = 4) -> FormalKnot:
    return FormalKnot(tuple(
        Atom(twist_matrix(rng.randint(1, n_max)), rng.randint(1, r_max),
             rng.choice([1, -1]))
        for _ in range(atoms)))


def numeric_sigma(matrix: SeifertMatrix, turns: float) -> int:
    """Floating-point signature of M(omega), for cross-checks off jump points."""
    a = np.array(matrix.rows, dtype=complex)
    w = np.exp(2j * np.pi * turns)
    m = (1 - w) * a + (1 - w.conjugate()) * a.conj().T
    vals = np.linalg.eigvalsh(m)
    assert min(abs(vals)) > 1e-8, "oracle sampled too close to a jump"
    return int(sum(1 for v in vals if v > 0) - sum(1 for v in vals if v < 0))


class TestSeifertMatrix:
    def test_trefoil_accepted(self):
        m = twist_matrix(1)
        assert m.rows == ((-1, 1), (0, -1))
        assert twist_parameter(m) == 1

    def test_rejects_non_unit_pairing(self):
        with pytest.raises(ValueError, match="not a unit"):
            SeifertMatrix.from_rows([[1]])
        with pytest.raises(ValueError, match="not a unit"):
            SeifertMatrix.from_rows([[0, 2], [0, 0]])
        with pytest.raises(ValueError, match="square"):
            SeifertMatrix.from_rows([[0, 1]])

    def test_empty_matrix_valid(self):
        assert SeifertMatrix.from_rows([]).size == 0

    def test_twist_matrix_validation(self):
        with pytest.raises(ValueError, match=">= 1"):
            twist_matrix(0)
        assert twist_parameter(twist_matrix(5)) == 5
        assert twist_parameter(SeifertMatrix.from_rows([[0, 1], [0, 0]])) is None

    def test_random_generator_produces_valid_matrices(self):
        rng = random.Random(3)
        for _ in range(20):
            random_seifert(rng, rng.randint(1, 3))

    def test_json_round_trip(self):
        m = random_seifert(random.Random(4), 2)
        assert SeifertMatrix.from_json(m.to_json()) == m


class TestOmegaSignature:
    def test_trefoil_at_minus_one(self):
        # M(-1) = 2A + 2A^T = [[-4,2],[2,-4]], eigenvalues -2 and -6
        assert omega_signature(twist_matrix(1), 2, 1) == -2
        vals = np.linalg.eigvalsh(np.array([[-4, 2], [2, -4]]))
        assert all(v < 0 for v in vals)

    def test_trefoil_at_i(self):
        # M(i) = [[-2, 1-i],[1+i, -2]]: det = 4 - 2 = 2 > 0, trace < 0
        assert omega_signature(twist_matrix(1), 4, 1) == -2

    def test_any_matrix_at_one_is_zero(self):
        rng = random.Random(9)
        for _ in range(5):
            m = random_seifert(rng, 2)
            assert omega_signature(m, 8, 0) == 0
            assert omega_signature(m, 8, 8) == 0

    def test_symmetry_under_conjugation(self):
        rng = random.Random(10)
        for _ in range(5):
            m = random_seifert(rng, 2)
            for d in (4, 8, 9):
                for s in range(1, d):
                    assert omega_signature(m, d, s) == omega_signature(m, d, d - s)

    def test_matches_numeric_oracle(self):
        rng = random.Random(12)
        for _ in range(6):
            m = random_seifert(rng, rng.randint(1, 2))
            for d, s in ((4, 1), (8, 3), (16, 5), (9, 2)):
                assert omega_signature(m, d, s) == numeric_sigma(m, s / d)

    def test_rejects_non_prime_power_order(self):
        with pytest.raises(ValueError, match="prime power"):
            omega_signature(twist_matrix(1), 6, 1)

    def test_even_values_only(self):
        # at prime-power roots the form is nonsingular of even size
        rng = random.Random(14)
        for _ in range(5):
            m = random_seifert(rng, 2)
            assert omega_signature(m, 16, 3) % 2 == 0


class TestSignatureProfile:
    def test_trefoil_profile(self):
        prof = signature_profile(TREFOIL)
        assert len(prof.jumps) == 2
        first, second = prof.jumps
        assert first.rational_position() == Fraction(1, 6)
        assert first.height == -2
        assert second.rational_position() == Fraction(5, 6)
        assert second.height == 2

    def test_trefoil_values(self):
        prof = signature_profile(TREFOIL)
        assert prof.evaluate(Fraction(0)) == (0, False)
        assert prof.evaluate(Fraction(1, 12)) == (0, False)
        assert prof.evaluate(Fraction(1, 4)) == (-2, False)
        assert prof.evaluate(Fraction(1, 2)) == (-2, False)
        assert prof.evaluate(Fraction(11, 12)) == (0, False)
        assert prof.evaluate(Fraction(1, 6)) == (-1, True)

    def test_at_jump_average_against_one_sided_matrix_oracle(self):
        # dyadic angles 5/32 < 1/6 < 11/64 bracket the jump and have
        # prime-power denominators, so the matrix path evaluates there exactly
        left = omega_signature(twist_matrix(1), 32, 5)
        right = omega_signature(twist_matrix(1), 64, 11)
        assert (left, right) == (0, -2)
        ev = sigma_details(TREFOIL, 6, 1)
        assert ev.value == (left + right) // 2 == -1
        assert ev.at_jump
        assert ev.path == "profile"

    def test_twist_two_jump_position(self):
        prof = signature_profile(twist_knot(2))
        jump = prof.jumps[0]
        assert jump.rational_position() is None
        # arccos(3/4)/(2 pi) lies strictly between 1/10 and 1/8
        assert jump.compare_to_turn(Fraction(1, 10)) > 0
        assert jump.compare_to_turn(Fraction(1, 8)) < 0
        # numeric spot check of the encoded position
        assert abs(jump.position_approx() - math.acos(0.75) / (2 * math.pi)) < 1e-12

    def test_mirror_negates_heights(self):
        prof = signature_profile(-twist_knot(3))
        assert sorted(j.height for j in prof.jumps) == [-2, 2]
        plus = signature_profile(twist_knot(3))
        assert [(j.n, j.cable, j.k, j.branch) for j in plus.jumps] == \
            [(j.n, j.cable, j.k, j.branch) for j in prof.jumps]
        assert [j.height for j in plus.jumps] == [-j.height for j in prof.jumps]

    def test_connected_sum_with_mirror_cancels(self):
        rng = random.Random(15)
        for _ in range(5):
            k = random_twist_knot(rng, 3)
            assert signature_profile(k - k).jumps == ()

    def test_cable_jump_fan(self):
        prof = signature_profile(twist_knot(1, cable=3))
        assert len(prof.jumps) == 6
        positions = sorted(j.rational_position() for j in prof.jumps)
        assert positions == [Fraction(1, 18), Fraction(5, 18), Fraction(7, 18),
                             Fraction(11, 18), Fraction(13, 18), Fraction(17, 18)]

    def test_coincident_rational_jumps_merge(self):
        # the 5-cable's branch at (0 + 5/6)/5 = 1/6 lands exactly on the
        # trefoil's own jump with opposite height, so the merged profile has
        # no jump there at all and sigma is continuous across 1/6
        k = twist_knot(1) + twist_knot(1, cable=5)
        prof = signature_profile(k)
        positions = [j.rational_position() for j in prof.jumps]
        assert Fraction(1, 6) not in positions
        assert Fraction(5, 6) not in positions
        assert len(prof.jumps) == 8  # 2 + 10 jumps with two cancelling pairs
        assert prof.evaluate(Fraction(1, 6)) == (-2, False)
        # dual oracle across the former jump: matrix path at dyadic angles
        assert sigma(k, 32, 5) == -2 and sigma(k, 64, 11) == -2

    def test_coincident_jumps_with_equal_signs_stack(self):
        k = twist_knot(1) + twist_knot(1, cable=5, sign=-1)
        prof = signature_profile(k)
        at_sixth = [j for j in prof.jumps
                    if j.rational_position() == Fraction(1, 6)]
        assert len(at_sixth) == 1
        assert at_sixth[0].height == -4
        # one-sided limits +2 (past the cable jump at 1/30) and -2 average to 0
        assert prof.evaluate(Fraction(1, 6)) == (0, True)

    def test_symmetry_sigma_of_conjugate(self):
        rng = random.Random(16)
        for _ in range(5):
            k = random_twist_knot(rng, 2)
            prof = signature_profile(k)
            for _ in range(6):
                u = Fraction(rng.randint(0, 63), 64)
                assert prof.evaluate(u) == prof.evaluate(1 - u)

    def test_rejects_unsupported_matrix(self):
        k = FormalKnot.of(Atom(SeifertMatrix.from_rows([[0, 1], [0, 0]])))
        with pytest.raises(ValueError, match="matrix path"):
            signature_profile(k)

    def test_profile_json(self):
        data = signature_profile(TREFOIL).to_json()
        assert data[0]["height"] == -2
        assert abs(data[0]["position_turns_approx"] - 1 / 6) < 1e-12


class TestDualOracle:
    def test_matrix_and_profile_agree_on_prime_power_roots(self):
        rng = random.Random(17)
        for _ in range(12):
            k = random_twist_knot(rng, rng.randint(1, 3))
            prof = signature_profile(k)
            for d in (4, 8, 16, 27):
                for s in range(d):
                    ev = sigma_details(k, d, s)
                    assert ev.path in ("matrix", "trivial")
                    value, at_jump = prof.evaluate(Fraction(s, d))
                    assert not at_jump  # no jumps at prime-power roots
                    assert ev.value == value

    def test_profile_against_numeric_oracle_at_non_prime_power(self):
        rng = random.Random(18)
        for _ in range(6):
            k = random_twist_knot(rng, 2, n_max=4, r_max=3)
            for d, s in ((6, 1), (12, 5), (15, 2), (21, 4)):
                ev = sigma_details(k, d, s)
                assert ev.path in ("profile", "trivial")
                if ev.at_jump:
                    continue
                total = sum(a.sign * numeric_sigma(a.matrix, (s * a.cable % d) / d)
                            for a in k.atoms)
                assert ev.value == total

    def test_reparametrization(self):
        rng = random.Random(19)
        for _ in range(8):
            k = random_twist_knot(rng, 2, r_max=2)
            r = rng.randint(1, 8)
            d = rng.choice([8, 16, 32])
            s = rng.randrange(d)
            assert sigma(k.cable(r), d, s) == sigma(k, d, r * s)

    def test_additivity_and_mirror(self):
        rng = random.Random(20)
        k1 = random_twist_knot(rng, 2)
        k2 = random_twist_knot(rng, 2)
        for d in (4, 8):
            for s in range(d):
                assert sigma(k1 + k2, d, s) == sigma(k1, d, s) + sigma(k2, d, s)
                assert sigma(-k1, d, s) == -sigma(k1, d, s)

    def test_sigma_at_one_is_zero(self):
        rng = random.Random(21)
        for _ in range(5):
            k = random_twist_knot(rng, 3)
            assert sigma(k, 1, 0) == 0
            assert sigma(k, 7, 0) == 0


class TestIntegral:
    def test_trefoil_integral_exact(self):
        total = integral_sigma(TREFOIL)
        assert total.pi_coeff == Fraction(-8, 3)
        assert total.arccos_terms == ()

    def test_trefoil_integral_quadrature_oracle(self):
        samples = 10 ** 4
        acc = 0.0
        a = np.array(twist_matrix(1).rows, dtype=complex)
        for i in range(samples):
            w = np.exp(2j * np.pi * (i + 0.5) / samples)
            m = (1 - w) * a + (1 - w.conjugate()) * a.conj().T
            vals = np.linalg.eigvalsh(m)
            acc += sum(np.sign(v) for v in vals if abs(v) > 1e-9)
        numeric = acc / samples * 2 * math.pi
        assert abs(numeric - float(integral_sigma(TREFOIL).value())) < 1e-2

    def test_empty_knot_integral_zero(self):
        assert integral_sigma(FormalKnot()).is_zero()

    def test_cable_invariance(self):
        # the integral is unchanged by cabling, so J # -cable(J) integrates to 0
        rng = random.Random(22)
        for _ in range(5):
            j = random_twist_knot(rng, 2)
            r = rng.randint(2, 4)
            diff = integral_sigma(j) + (-integral_sigma(j.cable(r)))
            assert diff.is_zero()
            assert integral_sigma(j - j.cable(r)).is_zero()

    def test_twist_two_integral_value(self):
        # 2 * (2 arccos(3/4) - 2 pi): jump height -2 on the arc of length
        # 2 pi - 2 arccos(3/4) on each side combined
        total = integral_sigma(twist_knot(2))
        assert total.pi_coeff == Fraction(-4)
        assert total.arccos_terms == ((Fraction(3, 4), Fraction(4)),)
        expected = 4 * math.acos(3 / 4) - 4 * math.pi
        assert abs(float(total.value()) - expected) < 1e-12


def brute_force_arf(matrix: SeifertMatrix) -> int:
    """Majority count of the Z_2 quadratic form q(x) = x A x^T mod 2."""
    n = matrix.size
    zeros = 0
    for bits in product((0, 1), repeat=n):
        q = 0
        for i in range(n):
            for j in range(n):
                q += bits[i] * matrix.rows[i][j] * bits[j]
        zeros += (q % 2) == 0
    return 0 if zeros > 2 ** (n - 1) else 1


class TestArf:
    def test_trefoil(self):
        assert arf(TREFOIL) == 1
        assert brute_force_arf(twist_matrix(1)) == 1

    def test_twist_family_parity(self):
        for n in range(1, 9):
            assert arf(twist_knot(n)) == n % 2
            assert brute_force_arf(twist_matrix(n)) == n % 2

    def test_against_brute_force_on_random_matrices(self):
        rng = random.Random(25)
        for _ in range(15):
            m = random_seifert(rng, rng.randint(1, 2))
            k = FormalKnot.of(Atom(m))
            assert arf(k) == brute_force_arf(m)

    def test_doubling_kills_arf(self):
        rng = random.Random(26)
        for _ in range(5):
            k = random_twist_knot(rng, 2)
            assert arf(k + k) == 0

    def test_additive_mod_two(self):
        rng = random.Random(27)
        for _ in range(8):
            k1 = random_twist_knot(rng, 2)
            k2 = random_twist_knot(rng, 2)
            assert arf(k1 + k2) == (arf(k1) + arf(k2)) % 2

    def test_even_cables_drop_out(self):
        assert arf(twist_knot(1, cable=2)) == 0
        assert arf(twist_knot(1, cable=3)) == 1
        assert arf(twist_knot(1, cable=4)) == 0

    def test_mirror_preserves_arf(self):
        for n in (1, 2, 3):
            assert arf(-twist_knot(n)) == arf(twist_knot(n))

    def test_empty(self):
        assert arf(FormalKnot()) == 0


class TestFormalKnotApi:
    def test_json_round_trip(self):
        rng = random.Random(28)
        k = random_twist_knot(rng, 3)
        k = k + FormalKnot.of(Atom(random_seifert(rng, 1), 2, -1))
        assert FormalKnot.from_json(k.to_json()) == k

    def test_atom_validation(self):
        with pytest.raises(ValueError, match="cable"):
            Atom(twist_matrix(1), 0, 1)
        with pytest.raises(ValueError, match="sign"):
            Atom(twist_matrix(1), 1, 2)

    def test_cable_composition(self):
        k = twist_knot(2, cable=3)
        assert k.cable(2).atoms[0].cable == 6
        with pytest.raises(ValueError, match=">= 1"):
            k.cable(0)
