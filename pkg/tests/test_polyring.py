"""Tests for RNS polynomials, layouts and ciphertext containers."""

import numpy as np
import pytest

from pimring.errors import DomainError
from pimring.ring.polyring import (
    Ciphertext,
    Domain,
    Layout,
    RnsPolynomial,
    SubPolynomial,
    convert_layout,
    from_layout,
    negacyclic_mul_exact,
    negate,
    pointwise_add,
    pointwise_mul,
    pointwise_sub,
    schoolbook_negacyclic_mul,
)
from pimring.ring.rns import build_base


def _monomial(base, degree, n=8, index=0):
    coeffs = np.zeros(n, dtype=np.uint64)
    coeffs[degree] = 1
    return SubPolynomial(coeffs=coeffs, modulus_index=index, modulus=base.moduli[index])


def _ring_product(a, b):
    return RnsPolynomial.from_subs(
        a.base, [schoolbook_negacyclic_mul(x, y) for x, y in zip(a.subs, b.subs)]
    )


class TestSubPolynomial:
    """Tests for single-modulus sub-polynomials."""

    def test_coefficients_are_read_only_copies(self, base8):
        """Test the stored array is detached from the caller's buffer."""
        source = np.arange(8, dtype=np.uint64)
        sub = SubPolynomial(coeffs=source, modulus_index=0, modulus=base8.moduli[0])
        source[0] = 99
        assert int(sub.coeffs[0]) == 0
        assert not sub.coeffs.flags.writeable

    def test_rejects_unreduced(self, base8):
        """Test coefficients must be below the modulus."""
        m = base8.moduli[0]
        with pytest.raises(DomainError):
            SubPolynomial(coeffs=[m.p] + [0] * 7, modulus_index=0, modulus=m)

    def test_rejects_bad_length(self, base8):
        """Test lengths must be powers of two."""
        with pytest.raises(DomainError):
            SubPolynomial(coeffs=[0] * 6, modulus_index=0, modulus=base8.moduli[0])

    def test_bytes_are_little_endian_words(self, base8):
        """Test the wire form of residues."""
        m = base8.moduli[0]
        sub = SubPolynomial(coeffs=[1, 0x01020304] + [0] * 6, modulus_index=0, modulus=m)
        data = sub.to_bytes()
        assert data[:8] == bytes([1, 0, 0, 0, 4, 3, 2, 1])
        assert SubPolynomial.from_bytes(data, 0, m) == sub

    def test_from_bytes_partial_word(self, base8):
        """Test a byte count that is not a multiple of 4."""
        with pytest.raises(DomainError):
            SubPolynomial.from_bytes(b"\x00" * 7, 0, base8.moduli[0])


class TestRnsPolynomial:
    """Tests for the (k, n) residue container."""

    def test_subs_round_trip(self, base8, rng):
        """Test splitting into sub-polynomials and reassembling."""
        poly = RnsPolynomial.random(base8, 8, rng)
        assert RnsPolynomial.from_subs(base8, poly.subs) == poly

    def test_from_subs_wrong_order(self, base8, rng):
        """Test sub-polynomials must follow base order."""
        poly = RnsPolynomial.random(base8, 8, rng)
        with pytest.raises(DomainError):
            RnsPolynomial.from_subs(base8, poly.subs[::-1])

    def test_coefficients_round_trip(self, base8):
        """Test big-integer coefficients survive decomposition."""
        coeffs = [0, 1, 2, base8.big_modulus - 1, 10**15, 7, 8, 9]
        poly = RnsPolynomial.from_coefficients(coeffs, base8)
        assert poly.residues.shape == (2, 8)
        assert poly.to_coefficients() == coeffs

    def test_wrong_row_count(self, base8):
        """Test the residue array must have k rows."""
        with pytest.raises(DomainError):
            RnsPolynomial(base=base8, residues=np.zeros((3, 8), dtype=np.uint64))

    def test_constant_in_both_domains(self, base8):
        """Test a constant fills slot 0 in coefficient form and every slot in NTT form."""
        coeff = RnsPolynomial.constant(base8, 8, 5)
        ntt = RnsPolynomial.constant(base8, 8, 5, Domain.NTT_BIT_REVERSED)
        assert coeff.to_coefficients() == [5, 0, 0, 0, 0, 0, 0, 0]
        assert ntt.to_coefficients() == [5] * 8

    def test_str(self, base8):
        """Test the short description."""
        assert str(RnsPolynomial.zeros(base8, 8)) == "RnsPolynomial(n=8, k=2, coefficient)"


class TestPointwise:
    """Tests for slot-wise operations."""

    def test_add_sub_inverse(self, base8, rng):
        """Test (a + b) - b == a."""
        a = RnsPolynomial.random(base8, 8, rng)
        b = RnsPolynomial.random(base8, 8, rng)
        assert pointwise_sub(pointwise_add(a, b), b) == a

    def test_add_matches_big_integers(self, base8, rng):
        """Test residue-wise addition agrees with addition modulo M."""
        a = RnsPolynomial.random(base8, 8, rng)
        b = RnsPolynomial.random(base8, 8, rng)
        expected = [
            (x + y) % base8.big_modulus
            for x, y in zip(a.to_coefficients(), b.to_coefficients())
        ]
        assert pointwise_add(a, b).to_coefficients() == expected

    def test_negate(self, base8, rng):
        """Test a + (-a) == 0 and -0 == 0."""
        a = RnsPolynomial.random(base8, 8, rng)
        zero = RnsPolynomial.zeros(base8, 8)
        assert pointwise_add(a, negate(a)) == zero
        assert negate(zero) == zero

    def test_add_keeps_domain(self, base8, rng):
        """Test addition works in the NTT domain too."""
        a = RnsPolynomial.random(base8, 8, rng, Domain.NTT_BIT_REVERSED)
        assert pointwise_add(a, a).domain is Domain.NTT_BIT_REVERSED

    def test_mul_needs_ntt_domain(self, base8, rng):
        """Test pointwise_mul refuses coefficient-form inputs."""
        a = RnsPolynomial.random(base8, 8, rng)
        with pytest.raises(DomainError):
            pointwise_mul(a, a)

    def test_mixed_domains(self, base8, rng):
        """Test operands must share a domain."""
        a = RnsPolynomial.random(base8, 8, rng)
        b = RnsPolynomial.random(base8, 8, rng, Domain.NTT_BIT_REVERSED)
        with pytest.raises(DomainError):
            pointwise_add(a, b)

    def test_different_bases(self, base8, rng):
        """Test operands must share a base."""
        other = build_base(8, 27)
        with pytest.raises(DomainError):
            pointwise_add(RnsPolynomial.zeros(base8, 8), RnsPolynomial.zeros(other, 8))

    def test_mul_slotwise(self, base8):
        """Test NTT-domain multiplication multiplies slot by slot."""
        a = RnsPolynomial.constant(base8, 8, 6, Domain.NTT_BIT_REVERSED)
        b = RnsPolynomial.constant(base8, 8, 7, Domain.NTT_BIT_REVERSED)
        assert pointwise_mul(a, b).to_coefficients() == [42] * 8


class TestSchoolbook:
    """Tests for the quadratic negacyclic product."""

    def test_wraparound_sign(self, base8):
        """Test x^(n-1) * x == -1."""
        m = base8.moduli[0]
        product = schoolbook_negacyclic_mul(_monomial(base8, 7), _monomial(base8, 1))
        assert [int(c) for c in product.coeffs] == [m.p - 1] + [0] * 7

    def test_matches_exact_oracle(self, base8, rng):
        """Test the vectorized product against the big-integer double loop."""
        m = base8.moduli[1]
        a = rng.integers(0, m.p, size=8, dtype=np.uint64)
        b = rng.integers(0, m.p, size=8, dtype=np.uint64)
        product = schoolbook_negacyclic_mul(
            SubPolynomial(coeffs=a, modulus_index=1, modulus=m),
            SubPolynomial(coeffs=b, modulus_index=1, modulus=m),
        )
        expected = negacyclic_mul_exact([int(x) for x in a], [int(x) for x in b], m.p)
        assert [int(c) for c in product.coeffs] == expected

    def test_exact_oracle_small(self):
        """Test (1 + x)^2 = 1 + 2x + x^2 in Z_17[x]/(x^2 + 1) reduces to 2x."""
        assert negacyclic_mul_exact([1, 1], [1, 1], 17) == [0, 2]

    def test_rejects_ntt_domain(self, base8):
        """Test schoolbook multiplication needs coefficient form."""
        sub = _monomial(base8, 1).with_coeffs(np.zeros(8), Domain.NTT_BIT_REVERSED)
        with pytest.raises(DomainError):
            schoolbook_negacyclic_mul(sub, sub)

    def test_commutative(self, base64, rng):
        """Test a * b == b * a under every modulus."""
        for _ in range(20):
            a = RnsPolynomial.random(base64, 64, rng)
            b = RnsPolynomial.random(base64, 64, rng)
            assert _ring_product(a, b) == _ring_product(b, a)

    def test_distributes_over_add(self, base64, rng):
        """Test a * (b + c) == a * b + a * c with the residue-wise add."""
        for _ in range(20):
            a, b, c = (RnsPolynomial.random(base64, 64, rng) for _ in range(3))
            left = _ring_product(a, pointwise_add(b, c))
            assert left == pointwise_add(_ring_product(a, b), _ring_product(a, c))


class TestLayouts:
    """Tests for tuple-of-arrays and array-of-tuples layouts."""

    def test_two_by_two_example(self, base8):
        """Test [A1 B1 | A2 B2] becomes [A1 A2 B1 B2]."""
        poly = RnsPolynomial(base=base8, residues=np.array([[11, 12], [21, 22]], dtype=np.uint64))
        toa = convert_layout(poly, Layout.TUPLE_OF_ARRAYS)
        aot = convert_layout(poly, Layout.ARRAY_OF_TUPLES)
        assert toa.tolist() == [11, 12, 21, 22]
        assert aot.tolist() == [11, 21, 12, 22]
        assert aot.dtype == np.uint32

    def test_inverse(self, base8, rng):
        """Test from_layout undoes convert_layout for both layouts."""
        poly = RnsPolynomial.random(base8, 8, rng)
        for layout in Layout:
            assert from_layout(convert_layout(poly, layout), base8, layout) == poly

    def test_uneven_buffer(self, base8):
        """Test a buffer that does not split into k rows."""
        with pytest.raises(DomainError):
            from_layout(np.zeros(5, dtype=np.uint32), base8, Layout.ARRAY_OF_TUPLES)


class TestCiphertext:
    """Tests for the ciphertext container."""

    def test_components_must_match(self, base8, rng):
        """Test both components share length and domain."""
        c0 = RnsPolynomial.random(base8, 8, rng)
        c1 = RnsPolynomial.random(base8, 8, rng, Domain.NTT_BIT_REVERSED)
        with pytest.raises(DomainError):
            Ciphertext(c0=c0, c1=c1)

    def test_from_coefficients(self, base8):
        """Test building a ciphertext from integer lists."""
        ct = Ciphertext.from_coefficients([1] * 8, [2] * 8, base8)
        assert ct.n == 8
        assert ct.domain is Domain.COEFFICIENT
        assert ct.c1.to_coefficients() == [2] * 8
