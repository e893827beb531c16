"""Scalar and vectorized modular arithmetic over 32-bit NTT-friendly primes.

The multiplication routines mirror how a DPU builds wide products out of
16x16-bit partial products, and reduction uses Barrett's method with a fixed
64-bit shift. Everything here is functionally exact; cycle costs of these
routines live in :mod:`pimring.pim.model`.
"""

from __future__ import annotations

import logging
from collections.abc import Iterator
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
import numpy.typing as npt
import sympy

from ..errors import DomainError, PrimeExhaustionError

logger = logging.getLogger(__name__)

WORD_BITS = 32
WORD_MASK = (1 << WORD_BITS) - 1
HALF_BITS = 16
HALF_MASK = (1 << HALF_BITS) - 1
BARRETT_SHIFT = 64
MAX_MODULUS_BITS = 32

U64Array = npt.NDArray[np.uint64]

_M16 = np.uint64(HALF_MASK)
_M32 = np.uint64(WORD_MASK)
_S16 = np.uint64(HALF_BITS)
_S32 = np.uint64(WORD_BITS)


def is_power_of_two(value: int) -> bool:
    """Check whether value is a positive power of two."""
    return value > 0 and value & (value - 1) == 0


@dataclass(frozen=True)
class ResidueModulus:
    """One NTT-friendly prime with its precomputed Barrett factor.

    Attributes:
        p: The prime modulus (below 2^32)
        barrett_factor: floor(2^64 / p)
        two_n: The negacyclic order 2n this prime supports (p = 1 mod two_n)
    """

    p: int
    barrett_factor: int
    two_n: int

    def __post_init__(self) -> None:
        if not 2 < self.p < (1 << MAX_MODULUS_BITS):
            raise DomainError(f"modulus {self.p} outside (2, 2^{MAX_MODULUS_BITS})")
        if not sympy.isprime(self.p):
            raise DomainError(f"modulus {self.p} is not prime")
        if self.two_n < 2 or (self.p - 1) % self.two_n:
            raise DomainError(f"modulus {self.p} is not 1 mod {self.two_n}")
        if self.barrett_factor != (1 << BARRETT_SHIFT) // self.p:
            raise DomainError(f"barrett factor {self.barrett_factor} does not match {self.p}")

    @classmethod
    def from_prime(cls, p: int, two_n: int) -> ResidueModulus:
        """Create a modulus, deriving its Barrett factor."""
        return cls(p=p, barrett_factor=(1 << BARRETT_SHIFT) // p, two_n=two_n)

    @property
    def n(self) -> int:
        """Largest polynomial length this prime supports."""
        return self.two_n // 2

    @property
    def bits(self) -> int:
        return self.p.bit_length()

    def __str__(self) -> str:
        return f"p={self.p} ({self.bits}-bit, 2n={self.two_n})"


@dataclass(frozen=True)
class WideProduct:
    """64-bit product of two 32-bit words, kept as two 32-bit limbs."""

    lo: int
    hi: int

    @property
    def value(self) -> int:
        return (self.hi << WORD_BITS) | self.lo


def _check_word(value: int, name: str) -> None:
    if not 0 <= value <= WORD_MASK:
        raise DomainError(f"{name}={value} is not a 32-bit word")


def wide_mul_32x32(a: int, b: int) -> WideProduct:
    """
    Multiply two 32-bit words into a 64-bit product from four 16x16 products.

    Schoolbook combination: hi << 32 + (m1 + m2) << 16 + lo.

    Args:
        a: First factor (32-bit)
        b: Second factor (32-bit)

    Returns:
        WideProduct whose limbs reconstruct a * b exactly
    """
    _check_word(a, "a")
    _check_word(b, "b")
    a0, a1 = a & HALF_MASK, a >> HALF_BITS
    b0, b1 = b & HALF_MASK, b >> HALF_BITS
    lo = a0 * b0
    m1 = a0 * b1
    m2 = a1 * b0
    hi = a1 * b1
    product = (hi << WORD_BITS) + ((m1 + m2) << HALF_BITS) + lo
    return WideProduct(lo=product & WORD_MASK, hi=product >> WORD_BITS)


def mod_mul32(a: int, b: int) -> int:
    """
    Multiply two 32-bit words keeping only the low 32 bits.

    Skips the hi partial product and truncates m1 + m2 to 16 bits.
    """
    _check_word(a, "a")
    _check_word(b, "b")
    a0, a1 = a & HALF_MASK, a >> HALF_BITS
    b0, b1 = b & HALF_MASK, b >> HALF_BITS
    middle = (a0 * b1 + a1 * b0) & HALF_MASK
    return (a0 * b0 + (middle << HALF_BITS)) & WORD_MASK


def barrett_reduce(v: int, m: ResidueModulus) -> int:
    """
    Reduce v modulo m.p with the precomputed Barrett factor.

    The quotient estimate q is at most two short, so v - q*p < 3p. When 3p
    fits a 32-bit word, that difference is taken on the low words alone and
    q*p comes from mod_mul32, as a 32-bit DPU would compute it.

    Args:
        v: Value below 2^64 (any product of two reduced residues qualifies)
        m: Modulus to reduce by

    Returns:
        v mod p
    """
    assert 0 <= v < (1 << BARRETT_SHIFT), "barrett_reduce input must fit 64 bits"
    q = (v * m.barrett_factor) >> BARRETT_SHIFT
    if 3 * m.p <= WORD_MASK:
        x = ((v & WORD_MASK) - mod_mul32(q & WORD_MASK, m.p)) & WORD_MASK
    else:
        x = v - q * m.p
    if x >= m.p:
        x -= m.p
    if x >= m.p:
        x -= m.p
    return x


def mod_add(a: int, b: int, m: ResidueModulus) -> int:
    s = a + b
    return s - m.p if s >= m.p else s


def mod_sub(a: int, b: int, m: ResidueModulus) -> int:
    return a - b if a >= b else a + m.p - b


def mod_neg(a: int, m: ResidueModulus) -> int:
    return m.p - a if a else 0


def mod_mul(a: int, b: int, m: ResidueModulus) -> int:
    """Multiply two residues: wide 32x32 product followed by Barrett reduction."""
    return barrett_reduce(wide_mul_32x32(a, b).value, m)


def mod_pow(base: int, exponent: int, m: ResidueModulus) -> int:
    """
    Raise base to a non-negative power by square-and-multiply.

    Args:
        base: Residue (reduced first if needed)
        exponent: Non-negative exponent
        m: Modulus

    Returns:
        base^exponent mod p
    """
    if exponent < 0:
        raise DomainError("negative exponent; use mod_inverse")
    base = base % m.p
    result = 1
    while exponent:
        if exponent & 1:
            result = mod_mul(result, base, m)
        base = mod_mul(base, base, m)
        exponent >>= 1
    return result


def mod_inverse(a: int, m: ResidueModulus) -> int:
    """Invert a modulo a prime via Fermat's little theorem."""
    a %= m.p
    if a == 0:
        raise DomainError(f"0 has no inverse modulo {m.p}")
    return mod_pow(a, m.p - 2, m)


def iter_ntt_primes(n: int, bit_size: int) -> Iterator[ResidueModulus]:
    """
    Yield primes p < 2^bit_size with p = 1 (mod 2n), largest first.

    Walks candidates downward in steps of 2n; primality is deterministic
    for this range.

    Args:
        n: Polynomial length (power of two)
        bit_size: Upper bound exponent for the primes (at most 32)
    """
    if not is_power_of_two(n):
        raise DomainError(f"polynomial length {n} is not a power of two")
    if not 2 <= bit_size <= MAX_MODULUS_BITS:
        raise DomainError(f"bit size {bit_size} outside [2, {MAX_MODULUS_BITS}]")
    step = 2 * n
    candidate = ((1 << bit_size) - 2) // step * step + 1
    while candidate > step:
        if sympy.isprime(candidate):
            yield ResidueModulus.from_prime(candidate, step)
        else:
            logger.debug(f"rejected NTT prime candidate {candidate}")
        candidate -= step


@lru_cache(maxsize=256)
def _ntt_primes(n: int, bit_size: int, count: int) -> tuple[ResidueModulus, ...]:
    primes: list[ResidueModulus] = []
    for modulus in iter_ntt_primes(n, bit_size):
        primes.append(modulus)
        if len(primes) == count:
            break
    return tuple(primes)


def find_ntt_prime(n: int, bit_size: int, index: int = 0) -> ResidueModulus:
    """
    Find the index-th largest prime below 2^bit_size with p = 1 (mod 2n).

    Successive indices give a sequence of distinct primes; the result is
    deterministic for fixed (n, bit_size, index).

    Args:
        n: Polynomial length (power of two)
        bit_size: Primes are searched below 2^bit_size
        index: How many larger primes to skip

    Returns:
        ResidueModulus for the prime

    Raises:
        PrimeExhaustionError: If fewer than index + 1 such primes exist
    """
    if index < 0:
        raise DomainError("prime index must be non-negative")
    primes = _ntt_primes(n, bit_size, index + 1)
    if len(primes) <= index:
        raise PrimeExhaustionError(n, bit_size, len(primes))
    return primes[index]


def find_primitive_2n_root(m: ResidueModulus, n: int) -> int:
    """
    Find a primitive 2n-th root of unity psi modulo m.p.

    psi is the smallest generator of Z_p^* raised to (p - 1) / 2n, so
    psi^n = -1 and the result is deterministic.
    """
    if not is_power_of_two(n) or (m.p - 1) % (2 * n):
        raise DomainError(f"{m.p} is not 1 mod 2*{n}")
    generator = int(sympy.primitive_root(m.p))
    return mod_pow(generator, (m.p - 1) // (2 * n), m)


# Vectorized counterparts used by the NTT and pointwise kernels.


def wide_mul_array(a: npt.ArrayLike, b: npt.ArrayLike) -> U64Array:
    """Element-wise 32x32 -> 64-bit product from four 16x16 partial products."""
    a = np.asarray(a, dtype=np.uint64)
    b = np.asarray(b, dtype=np.uint64)
    a0, a1 = a & _M16, a >> _S16
    b0, b1 = b & _M16, b >> _S16
    lo = a0 * b0
    m1 = a0 * b1
    m2 = a1 * b0
    hi = a1 * b1
    return (hi << _S32) + ((m1 + m2) << _S16) + lo


def barrett_reduce_array(v: npt.ArrayLike, m: ResidueModulus) -> U64Array:
    """
    Element-wise Barrett reduction of 64-bit values.

    The high word of v * R is assembled from 32-bit limbs so every partial
    product fits in 64 bits.
    """
    v = np.asarray(v, dtype=np.uint64)
    p = np.uint64(m.p)
    r_lo = np.uint64(m.barrett_factor & WORD_MASK)
    r_hi = np.uint64(m.barrett_factor >> WORD_BITS)
    v_lo = v & _M32
    v_hi = v >> _S32
    lo_lo = v_lo * r_lo
    hi_lo = v_hi * r_lo
    lo_hi = v_lo * r_hi
    middle = (lo_lo >> _S32) + (hi_lo & _M32) + (lo_hi & _M32)
    q = v_hi * r_hi + (hi_lo >> _S32) + (lo_hi >> _S32) + (middle >> _S32)
    x = v - q * p
    x = np.where(x >= p, x - p, x)
    return np.where(x >= p, x - p, x)


def mod_add_array(a: npt.ArrayLike, b: npt.ArrayLike, m: ResidueModulus) -> U64Array:
    p = np.uint64(m.p)
    s = np.asarray(a, dtype=np.uint64) + np.asarray(b, dtype=np.uint64)
    return np.where(s >= p, s - p, s)


def mod_sub_array(a: npt.ArrayLike, b: npt.ArrayLike, m: ResidueModulus) -> U64Array:
    p = np.uint64(m.p)
    a = np.asarray(a, dtype=np.uint64)
    b = np.asarray(b, dtype=np.uint64)
    return np.where(a >= b, a - b, (a + p) - b)


def mod_neg_array(a: npt.ArrayLike, m: ResidueModulus) -> U64Array:
    p = np.uint64(m.p)
    a = np.asarray(a, dtype=np.uint64)
    return np.where(a == 0, a, p - a)


def mod_mul_array(a: npt.ArrayLike, b: npt.ArrayLike, m: ResidueModulus) -> U64Array:
    return barrett_reduce_array(wide_mul_array(a, b), m)
