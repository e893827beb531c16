"""BGV ciphertext multiplication on RNS/NTT data.

Given ct = (ct_0, ct_1) and ct' = (ct'_0, ct'_1) in the NTT domain:

    c_0 = ct_0 * ct'_0
    c_1 = ct_0 * ct'_1 + ct_1 * ct'_0
    c_2 = ct_1 * ct'_1

all reduced by the current level modulus q_l, which here is simply the RNS
base the ciphertexts carry. Every product is slot-wise and residue-wise, so
residues of different moduli never interact.
"""

from __future__ import annotations

import logging
from collections.abc import Sequence
from dataclasses import dataclass

from ..errors import DomainError
from .ntt import TwiddleTable, build_base_twiddles, ntt_forward_poly, ntt_inverse_poly
from .polyring import (
    BgvProduct,
    Ciphertext,
    Domain,
    RnsPolynomial,
    negacyclic_mul_exact,
    pointwise_add,
    pointwise_mul,
)
from .rns import RnsBase

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class LevelModulus:
    """The active modulus q_l, represented by its RNS base."""

    base: RnsBase

    def __post_init__(self) -> None:
        if self.base.k < 1:
            raise DomainError("level modulus needs a non-empty base")

    @property
    def q(self) -> int:
        return self.base.big_modulus

    def check(self, ct: Ciphertext) -> None:
        """Raise DomainError unless ct lives at this level."""
        if ct.base != self.base:
            raise DomainError("ciphertext is not at this modulus level")


def _check_pair(ct: Ciphertext, ct2: Ciphertext, domain: Domain) -> None:
    if ct.base != ct2.base:
        raise DomainError("ciphertexts use different RNS bases")
    if ct.n != ct2.n:
        raise DomainError(f"ciphertext lengths differ: {ct.n} vs {ct2.n}")
    if ct.domain is not domain or ct2.domain is not domain:
        raise DomainError(f"ciphertexts must be in the {domain.value} domain")


def bgv_multiply(ct: Ciphertext, ct2: Ciphertext, level: LevelModulus | None = None) -> BgvProduct:
    """
    Multiply two NTT-domain ciphertexts into a three-element product.

    No relinearization is applied.

    Args:
        ct: First ciphertext (NTT domain)
        ct2: Second ciphertext (NTT domain, same base and n)
        level: Expected modulus level; both ciphertexts must carry its base

    Returns:
        BgvProduct (c_0, c_1, c_2), still in the NTT domain
    """
    _check_pair(ct, ct2, Domain.NTT_BIT_REVERSED)
    if level is not None:
        level.check(ct)
        level.check(ct2)
    c0 = pointwise_mul(ct.c0, ct2.c0)
    c1 = pointwise_add(pointwise_mul(ct.c0, ct2.c1), pointwise_mul(ct.c1, ct2.c0))
    c2 = pointwise_mul(ct.c1, ct2.c1)
    return BgvProduct(c0=c0, c1=c1, c2=c2)


def ntt_ciphertext(ct: Ciphertext, tables: Sequence[TwiddleTable]) -> Ciphertext:
    """Forward-transform both polynomials of a coefficient-form ciphertext."""
    return Ciphertext(c0=ntt_forward_poly(ct.c0, tables), c1=ntt_forward_poly(ct.c1, tables))


def intt_product(product: BgvProduct, tables: Sequence[TwiddleTable]) -> BgvProduct:
    """Inverse-transform the three polynomials of a product."""
    return BgvProduct(*(ntt_inverse_poly(p, tables) for p in product.polys))


def pipeline_multiply(
    a: Ciphertext,
    b: Ciphertext,
    tables: Sequence[TwiddleTable] | None = None,
    level: LevelModulus | None = None,
) -> BgvProduct:
    """
    NTT all four input polynomials, multiply, and iNTT the three outputs.

    Args:
        a: Coefficient-form ciphertext
        b: Coefficient-form ciphertext with the same base and n
        tables: Twiddle tables per modulus; built from the base when omitted
        level: Expected modulus level, checked before any transform

    Returns:
        Coefficient-form BgvProduct
    """
    _check_pair(a, b, Domain.COEFFICIENT)
    if level is not None:
        level.check(a)
        level.check(b)
    if tables is None:
        tables = build_base_twiddles(a.base, a.n)
    product = bgv_multiply(ntt_ciphertext(a, tables), ntt_ciphertext(b, tables), level)
    logger.debug(f"Pipeline multiply done for n={a.n}, k={a.base.k}")
    return intt_product(product, tables)


def _ring_mul(x: RnsPolynomial, y: RnsPolynomial) -> list[int]:
    return negacyclic_mul_exact(x.to_coefficients(), y.to_coefficients(), x.base.big_modulus)


def bgv_multiply_reference(a: Ciphertext, b: Ciphertext) -> BgvProduct:
    """
    Arbitrary-precision product in Z_M[x]/(x^n + 1), decomposed back into residues.

    Lifts every coefficient through the CRT and multiplies with the schoolbook
    double loop, so it shares no arithmetic with the NTT path.
    """
    _check_pair(a, b, Domain.COEFFICIENT)
    big = a.base.big_modulus
    c0 = _ring_mul(a.c0, b.c0)
    cross = zip(_ring_mul(a.c0, b.c1), _ring_mul(a.c1, b.c0), strict=True)
    c1 = [(x + y) % big for x, y in cross]
    c2 = _ring_mul(a.c1, b.c1)
    return BgvProduct(
        c0=RnsPolynomial.from_coefficients(c0, a.base),
        c1=RnsPolynomial.from_coefficients(c1, a.base),
        c2=RnsPolynomial.from_coefficients(c2, a.base),
    )
