"""RNS polynomials in Z_q[x]/(x^n + 1) stored as a tuple of arrays of residues.

A polynomial under a k-modulus base is a C-contiguous (k, n) array: row i is
the sub-polynomial of residues modulo m_i. Every container carries a domain
flag (coefficient form or bit-reversed NTT form) that operations check.
"""

from __future__ import annotations

import logging
from collections.abc import Sequence
from dataclasses import dataclass
from enum import Enum

import numpy as np
import numpy.typing as npt

from ..errors import DomainError
from .modarith import (
    ResidueModulus,
    U64Array,
    is_power_of_two,
    mod_add_array,
    mod_mul_array,
    mod_neg_array,
    mod_sub_array,
)
from .rns import RnsBase, decompose_many, reconstruct_many

logger = logging.getLogger(__name__)

RESIDUE_BYTES = 4


class Domain(Enum):
    """Representation of a polynomial's slots."""

    COEFFICIENT = "coefficient"
    NTT_BIT_REVERSED = "ntt-bit-reversed"


class Layout(Enum):
    """Flat memory layouts of an RNS polynomial."""

    TUPLE_OF_ARRAYS = "tuple-of-arrays"
    ARRAY_OF_TUPLES = "array-of-tuples"


def _frozen_copy(values: npt.ArrayLike) -> U64Array:
    arr = np.array(values, dtype=np.uint64, copy=True, order="C")
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True, eq=False)
class SubPolynomial:
    """Residues of one polynomial under a single modulus, contiguous in memory."""

    coeffs: U64Array
    modulus_index: int
    modulus: ResidueModulus
    domain: Domain = Domain.COEFFICIENT

    def __post_init__(self) -> None:
        coeffs = _frozen_copy(self.coeffs)
        if coeffs.ndim != 1 or not is_power_of_two(coeffs.shape[0]):
            raise DomainError(f"sub-polynomial length {coeffs.shape} is not a power of two")
        if coeffs.size and int(coeffs.max()) >= self.modulus.p:
            raise DomainError(f"coefficient not reduced modulo {self.modulus.p}")
        object.__setattr__(self, "coeffs", coeffs)

    @property
    def n(self) -> int:
        return int(self.coeffs.shape[0])

    def with_coeffs(self, coeffs: npt.ArrayLike, domain: Domain | None = None) -> SubPolynomial:
        """Same modulus, new slots."""
        return SubPolynomial(
            coeffs=coeffs,
            modulus_index=self.modulus_index,
            modulus=self.modulus,
            domain=self.domain if domain is None else domain,
        )

    def to_bytes(self) -> bytes:
        """n little-endian 4-byte residues."""
        return self.coeffs.astype("<u4").tobytes()

    @classmethod
    def from_bytes(
        cls,
        data: bytes,
        modulus_index: int,
        modulus: ResidueModulus,
        domain: Domain = Domain.COEFFICIENT,
    ) -> SubPolynomial:
        if len(data) % RESIDUE_BYTES:
            raise DomainError(f"{len(data)} bytes is not a whole number of residues")
        coeffs = np.frombuffer(data, dtype="<u4").astype(np.uint64)
        return cls(coeffs=coeffs, modulus_index=modulus_index, modulus=modulus, domain=domain)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, SubPolynomial):
            return NotImplemented
        return (
            self.modulus == other.modulus
            and self.modulus_index == other.modulus_index
            and self.domain == other.domain
            and np.array_equal(self.coeffs, other.coeffs)
        )

    __hash__ = None  # type: ignore[assignment]


@dataclass(frozen=True, eq=False)
class RnsPolynomial:
    """k sub-polynomials of length n, one per base modulus (rows of a (k, n) array)."""

    base: RnsBase
    residues: U64Array
    domain: Domain = Domain.COEFFICIENT

    def __post_init__(self) -> None:
        residues = _frozen_copy(self.residues)
        if residues.ndim != 2 or residues.shape[0] != self.base.k:
            raise DomainError(f"expected ({self.base.k}, n) residues, got {residues.shape}")
        if not is_power_of_two(residues.shape[1]):
            raise DomainError(f"polynomial length {residues.shape[1]} is not a power of two")
        if np.any(residues >= self.base.column(self.base.primes)):
            raise DomainError("residue not reduced modulo its base modulus")
        object.__setattr__(self, "residues", residues)

    @property
    def n(self) -> int:
        return int(self.residues.shape[1])

    @property
    def k(self) -> int:
        return self.base.k

    @property
    def subs(self) -> tuple[SubPolynomial, ...]:
        return tuple(
            SubPolynomial(
                coeffs=self.residues[i], modulus_index=i, modulus=m, domain=self.domain
            )
            for i, m in enumerate(self.base.moduli)
        )

    @classmethod
    def from_subs(cls, base: RnsBase, subs: Sequence[SubPolynomial]) -> RnsPolynomial:
        """Assemble a polynomial from one sub-polynomial per modulus, in base order."""
        if len(subs) != base.k:
            raise DomainError(f"expected {base.k} sub-polynomials, got {len(subs)}")
        domains = {s.domain for s in subs}
        if len(domains) != 1:
            raise DomainError("sub-polynomials are in different domains")
        for i, (sub, m) in enumerate(zip(subs, base.moduli, strict=True)):
            if sub.modulus != m or sub.modulus_index != i:
                raise DomainError(f"sub-polynomial {i} does not belong to modulus {m.p}")
        return cls(base=base, residues=np.stack([s.coeffs for s in subs]), domain=domains.pop())

    @classmethod
    def zeros(cls, base: RnsBase, n: int, domain: Domain = Domain.COEFFICIENT) -> RnsPolynomial:
        return cls(base=base, residues=np.zeros((base.k, n), dtype=np.uint64), domain=domain)

    @classmethod
    def constant(
        cls, base: RnsBase, n: int, value: int, domain: Domain = Domain.COEFFICIENT
    ) -> RnsPolynomial:
        """
        The constant polynomial ``value``.

        In the NTT domain a constant polynomial evaluates to ``value`` in every
        slot, so the same residues are used in both domains.
        """
        residues = np.zeros((base.k, n), dtype=np.uint64)
        for i, p in enumerate(base.primes):
            if domain is Domain.NTT_BIT_REVERSED:
                residues[i, :] = value % p
            else:
                residues[i, 0] = value % p
        return cls(base=base, residues=residues, domain=domain)

    @classmethod
    def random(
        cls,
        base: RnsBase,
        n: int,
        rng: np.random.Generator,
        domain: Domain = Domain.COEFFICIENT,
    ) -> RnsPolynomial:
        """Uniformly random residues from a seeded generator."""
        rows = [rng.integers(0, p, size=n, dtype=np.uint64) for p in base.primes]
        return cls(base=base, residues=np.stack(rows), domain=domain)

    @classmethod
    def from_coefficients(
        cls,
        coefficients: Sequence[int],
        base: RnsBase,
        domain: Domain = Domain.COEFFICIENT,
    ) -> RnsPolynomial:
        """Decompose big-integer coefficients in [0, M) into residues."""
        return cls(base=base, residues=decompose_many(coefficients, base), domain=domain)

    def to_coefficients(self) -> list[int]:
        """Reconstruct every slot as an integer in [0, M)."""
        return reconstruct_many(self.residues, self.base)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, RnsPolynomial):
            return NotImplemented
        return (
            self.base == other.base
            and self.domain == other.domain
            and np.array_equal(self.residues, other.residues)
        )

    __hash__ = None  # type: ignore[assignment]

    def __str__(self) -> str:
        return f"RnsPolynomial(n={self.n}, k={self.k}, {self.domain.value})"


def _check_compatible(a: RnsPolynomial, b: RnsPolynomial) -> None:
    if a.base != b.base:
        raise DomainError("polynomials use different RNS bases")
    if a.n != b.n:
        raise DomainError(f"polynomial lengths differ: {a.n} vs {b.n}")
    if a.domain != b.domain:
        raise DomainError(f"domains differ: {a.domain.value} vs {b.domain.value}")


def _rowwise(op, a: RnsPolynomial, *others: RnsPolynomial) -> U64Array:
    rows = [
        op(a.residues[i], *(o.residues[i] for o in others), m)
        for i, m in enumerate(a.base.moduli)
    ]
    return np.stack(rows)


def pointwise_add(a: RnsPolynomial, b: RnsPolynomial) -> RnsPolynomial:
    """Residue-wise (a + b) mod m_i; valid in either domain."""
    _check_compatible(a, b)
    return RnsPolynomial(base=a.base, residues=_rowwise(mod_add_array, a, b), domain=a.domain)


def pointwise_sub(a: RnsPolynomial, b: RnsPolynomial) -> RnsPolynomial:
    _check_compatible(a, b)
    return RnsPolynomial(base=a.base, residues=_rowwise(mod_sub_array, a, b), domain=a.domain)


def negate(a: RnsPolynomial) -> RnsPolynomial:
    """m_i - x per residue, with 0 mapped to 0."""
    return RnsPolynomial(base=a.base, residues=_rowwise(mod_neg_array, a), domain=a.domain)


def pointwise_mul(a: RnsPolynomial, b: RnsPolynomial) -> RnsPolynomial:
    """
    Slot-wise modular product of two NTT-domain polynomials.

    Raises:
        DomainError: If either input is in coefficient form or shapes differ
    """
    _check_compatible(a, b)
    if a.domain is not Domain.NTT_BIT_REVERSED:
        raise DomainError("pointwise_mul needs NTT-domain inputs")
    return RnsPolynomial(base=a.base, residues=_rowwise(mod_mul_array, a, b), domain=a.domain)


def schoolbook_negacyclic_mul(a: SubPolynomial, b: SubPolynomial) -> SubPolynomial:
    """
    Multiply two coefficient-form sub-polynomials modulo x^n + 1 in O(n^2).

    Terms wrapping past x^(n-1) are subtracted because x^n = -1.
    """
    if a.domain is not Domain.COEFFICIENT or b.domain is not Domain.COEFFICIENT:
        raise DomainError("schoolbook multiplication needs coefficient-form inputs")
    if a.modulus != b.modulus or a.n != b.n:
        raise DomainError("sub-polynomials differ in modulus or length")
    m = a.modulus
    n = a.n
    acc = np.zeros(n, dtype=np.uint64)
    for i, a_i in enumerate(a.coeffs):
        if not a_i:
            continue
        terms = mod_mul_array(np.full(n, a_i, dtype=np.uint64), b.coeffs, m)
        acc[i:] = mod_add_array(acc[i:], terms[: n - i], m)
        if i:
            acc[:i] = mod_sub_array(acc[:i], terms[n - i :], m)
    return a.with_coeffs(acc)


def negacyclic_mul_exact(a: Sequence[int], b: Sequence[int], modulus: int) -> list[int]:
    """Arbitrary-precision double loop over Z_modulus[x]/(x^n + 1); the test oracle."""
    n = len(a)
    if len(b) != n:
        raise DomainError("operands differ in length")
    out = [0] * n
    for i, a_i in enumerate(a):
        for j, b_j in enumerate(b):
            if i + j < n:
                out[i + j] += a_i * b_j
            else:
                out[i + j - n] -= a_i * b_j
    return [c % modulus for c in out]


def convert_layout(poly: RnsPolynomial, target: Layout) -> npt.NDArray[np.uint32]:
    """
    Flatten a polynomial into 32-bit cells in the requested layout.

    Tuple of arrays keeps each sub-polynomial contiguous (A1 B1 .. | A2 B2 ..);
    array of tuples interleaves the residues of each coefficient (A1 A2 .. B1 B2 ..).
    """
    if target is Layout.TUPLE_OF_ARRAYS:
        flat = poly.residues.reshape(-1)
    else:
        flat = poly.residues.T.reshape(-1)
    return flat.astype(np.uint32)


def from_layout(
    buffer: npt.ArrayLike,
    base: RnsBase,
    layout: Layout,
    domain: Domain = Domain.COEFFICIENT,
) -> RnsPolynomial:
    """Inverse of convert_layout."""
    flat = np.asarray(buffer, dtype=np.uint64).reshape(-1)
    if flat.size % base.k:
        raise DomainError(f"buffer of {flat.size} cells does not split into {base.k} moduli")
    n = flat.size // base.k
    if layout is Layout.TUPLE_OF_ARRAYS:
        residues = flat.reshape(base.k, n)
    else:
        residues = flat.reshape(n, base.k).T
    return RnsPolynomial(base=base, residues=residues, domain=domain)


@dataclass(frozen=True, eq=False)
class Ciphertext:
    """A BGV ciphertext (ct_0, ct_1)."""

    c0: RnsPolynomial
    c1: RnsPolynomial

    def __post_init__(self) -> None:
        _check_compatible(self.c0, self.c1)

    @property
    def base(self) -> RnsBase:
        return self.c0.base

    @property
    def n(self) -> int:
        return self.c0.n

    @property
    def domain(self) -> Domain:
        return self.c0.domain

    @property
    def polys(self) -> tuple[RnsPolynomial, RnsPolynomial]:
        return (self.c0, self.c1)

    @classmethod
    def random(
        cls,
        base: RnsBase,
        n: int,
        rng: np.random.Generator,
        domain: Domain = Domain.COEFFICIENT,
    ) -> Ciphertext:
        return cls(
            c0=RnsPolynomial.random(base, n, rng, domain),
            c1=RnsPolynomial.random(base, n, rng, domain),
        )

    @classmethod
    def from_coefficients(
        cls, c0: Sequence[int], c1: Sequence[int], base: RnsBase
    ) -> Ciphertext:
        """Coefficient-form ciphertext from two big-integer coefficient lists."""
        return cls(
            c0=RnsPolynomial.from_coefficients(c0, base),
            c1=RnsPolynomial.from_coefficients(c1, base),
        )

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Ciphertext):
            return NotImplemented
        return self.c0 == other.c0 and self.c1 == other.c1

    __hash__ = None  # type: ignore[assignment]


@dataclass(frozen=True, eq=False)
class BgvProduct:
    """The three-element result (c_0, c_1, c_2) of a BGV multiplication."""

    c0: RnsPolynomial
    c1: RnsPolynomial
    c2: RnsPolynomial

    def __post_init__(self) -> None:
        _check_compatible(self.c0, self.c1)
        _check_compatible(self.c0, self.c2)

    @property
    def base(self) -> RnsBase:
        return self.c0.base

    @property
    def n(self) -> int:
        return self.c0.n

    @property
    def domain(self) -> Domain:
        return self.c0.domain

    @property
    def polys(self) -> tuple[RnsPolynomial, RnsPolynomial, RnsPolynomial]:
        return (self.c0, self.c1, self.c2)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, BgvProduct):
            return NotImplemented
        return self.c0 == other.c0 and self.c1 == other.c1 and self.c2 == other.c2

    __hash__ = None  # type: ignore[assignment]
