"""Negacyclic NTT and inverse NTT with bit-reversed outputs.

The forward transform uses Cooley-Tukey butterflies and leaves its output in
bit-reversed order; the inverse uses Gentleman-Sande butterflies and consumes
it directly, so there is no reordering pass between them. Each stage is one
vectorized numpy step over all butterflies, and every kernel accepts leading
batch axes so many sub-polynomials under one modulus transform together.

Twiddle storage:

- ``forward[i] = psi^bitrev(i)``; the stage with m butterfly groups reads
  ``forward[m:2m]``.
- ``inverse_scrambled[1 + bitrev(i - 1)] = psi^-i`` with slot 0 holding 1; the
  inverse kernel reads it front to back without ever jumping backwards.
"""

from __future__ import annotations

import logging
from collections.abc import Sequence
from dataclasses import dataclass
from enum import Enum
from functools import lru_cache

import numpy as np
import numpy.typing as npt

from ..errors import DomainError
from .modarith import (
    ResidueModulus,
    U64Array,
    find_primitive_2n_root,
    is_power_of_two,
    mod_add_array,
    mod_inverse,
    mod_mul,
    mod_mul_array,
    mod_sub_array,
)
from .polyring import Domain, RnsPolynomial, SubPolynomial
from .rns import RnsBase

logger = logging.getLogger(__name__)


def bit_reverse(index: int, width_bits: int) -> int:
    """
    Reverse the lowest width_bits bits of index.

    Args:
        index: Value below 2^width_bits
        width_bits: Number of bits to reverse over

    Returns:
        The reversed index
    """
    if not 0 <= index < (1 << width_bits):
        raise DomainError(f"index {index} does not fit in {width_bits} bits")
    result = 0
    for _ in range(width_bits):
        result = (result << 1) | (index & 1)
        index >>= 1
    return result


def bit_reverse_permutation(n: int) -> npt.NDArray[np.intp]:
    """Indices [bitrev(0), bitrev(1), ...] for a length-n array."""
    if not is_power_of_two(n):
        raise DomainError(f"length {n} is not a power of two")
    width = n.bit_length() - 1
    return np.array([bit_reverse(i, width) for i in range(n)], dtype=np.intp)


class Threading(Enum):
    """How a DPU spreads NTT work over its hardware threads."""

    COARSE_GRAINED = "coarse"  # one sub-polynomial per thread
    FINE_GRAINED = "fine"  # all threads share the butterflies of one sub-polynomial

    @classmethod
    def from_name(cls, name: str) -> Threading:
        for member in cls:
            if name.lower() in (member.value, member.name.lower()):
                return member
        raise DomainError(f"unknown threading mode {name!r}")


class TwiddleOrder(Enum):
    """Storage order of the inverse twiddles."""

    SCRAMBLED = "scrambled"
    LOGICAL = "logical"


@dataclass(frozen=True)
class NttPlan:
    """Shape of one transform: length, stage count and threading hint."""

    n: int
    log2n: int
    stages: int
    threading: Threading = Threading.COARSE_GRAINED

    def __post_init__(self) -> None:
        if not is_power_of_two(self.n) or (1 << self.log2n) != self.n:
            raise DomainError(f"inconsistent plan for n={self.n}")
        if self.stages != self.log2n:
            raise DomainError(f"an NTT of length {self.n} has {self.log2n} stages")

    @classmethod
    def for_length(cls, n: int, threading: Threading = Threading.COARSE_GRAINED) -> NttPlan:
        if not is_power_of_two(n) or n < 2:
            raise DomainError(f"NTT length {n} must be a power of two >= 2")
        log2n = n.bit_length() - 1
        return cls(n=n, log2n=log2n, stages=log2n, threading=threading)

    @property
    def butterflies(self) -> int:
        """Total butterflies over all stages: (n/2) * log2(n)."""
        return (self.n // 2) * self.stages


def _frozen(values: npt.ArrayLike) -> U64Array:
    arr = np.array(values, dtype=np.uint64, copy=True)
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True, eq=False)
class TwiddleTable:
    """Precomputed powers of psi and psi^-1 for one modulus and length.

    Attributes:
        modulus_index: Position of the modulus in its RNS base
        modulus: The modulus the powers live in
        psi: Primitive 2n-th root of unity used
        forward: n powers of psi in bit-reversed exponent order
        inverse_scrambled: n powers of psi^-1 in the sequential-access order
        n_inv: n^-1 mod p
    """

    modulus_index: int
    modulus: ResidueModulus
    psi: int
    forward: U64Array
    inverse_scrambled: U64Array
    n_inv: int

    def __post_init__(self) -> None:
        forward = _frozen(self.forward)
        inverse = _frozen(self.inverse_scrambled)
        n = forward.shape[0]
        if forward.ndim != 1 or not is_power_of_two(n) or inverse.shape != forward.shape:
            raise DomainError("twiddle tables must be 1-D and of equal power-of-two length")
        p = self.modulus.p
        if int(forward.max()) >= p or int(inverse.max()) >= p:
            raise DomainError(f"twiddle not reduced modulo {p}")
        if mod_mul(self.n_inv, n % p, self.modulus) != 1:
            raise DomainError(f"n_inv={self.n_inv} is not the inverse of {n} modulo {p}")
        object.__setattr__(self, "forward", forward)
        object.__setattr__(self, "inverse_scrambled", inverse)

    @property
    def n(self) -> int:
        return int(self.forward.shape[0])

    @property
    def log2n(self) -> int:
        return self.n.bit_length() - 1

    def descramble_inverse(self) -> U64Array:
        """psi^-1, psi^-2, ..., psi^-(n-1) in logical order."""
        width = self.log2n
        slots = [1 + bit_reverse(i - 1, width) for i in range(1, self.n)]
        return self.inverse_scrambled[slots]


@lru_cache(maxsize=128)
def build_twiddles(m: ResidueModulus, n: int, modulus_index: int = 0) -> TwiddleTable:
    """
    Precompute forward and scrambled inverse twiddles for one modulus.

    Args:
        m: Modulus with p = 1 (mod 2n)
        n: Transform length
        modulus_index: Position of m in its base, carried for bookkeeping

    Returns:
        TwiddleTable, deterministic for fixed (p, n)
    """
    if not is_power_of_two(n) or n < 2:
        raise DomainError(f"NTT length {n} must be a power of two >= 2")
    psi = find_primitive_2n_root(m, n)
    psi_inv = mod_inverse(psi, m)
    width = n.bit_length() - 1

    powers = [1] * n
    inv_powers = [1] * n
    for e in range(1, n):
        powers[e] = mod_mul(powers[e - 1], psi, m)
        inv_powers[e] = mod_mul(inv_powers[e - 1], psi_inv, m)

    forward = [powers[bit_reverse(i, width)] for i in range(n)]
    scrambled = [1] * n
    for i in range(1, n):
        scrambled[1 + bit_reverse(i - 1, width)] = inv_powers[i]

    logger.debug(f"Built twiddles for {m}, n={n}, psi={psi}")
    return TwiddleTable(
        modulus_index=modulus_index,
        modulus=m,
        psi=psi,
        forward=forward,
        inverse_scrambled=scrambled,
        n_inv=mod_inverse(n, m),
    )


def build_base_twiddles(base: RnsBase, n: int) -> tuple[TwiddleTable, ...]:
    """One twiddle table per base modulus, in base order."""
    if not base.supports_length(n):
        raise DomainError(f"base does not support NTT length {n}")
    return tuple(build_twiddles(m, n, i) for i, m in enumerate(base.moduli))


def inverse_twiddle_reads(n: int, order: TwiddleOrder = TwiddleOrder.SCRAMBLED) -> list[int]:
    """
    Table indices an inverse transform reads, stage by stage.

    Scrambled storage gives 1, 2, ..., n-1; logical storage (psi^-e at e-1)
    jumps around within every stage.
    """
    width = n.bit_length() - 1
    reads: list[int] = []
    cursor = 1
    groups = n // 2
    while groups >= 1:
        if order is TwiddleOrder.SCRAMBLED:
            reads.extend(range(cursor, cursor + groups))
        else:
            reads.extend(bit_reverse(groups + i, width) - 1 for i in range(groups))
        cursor += groups
        groups //= 2
    return reads


def _prepare(values: npt.ArrayLike, table: TwiddleTable, copy: bool) -> U64Array:
    if copy:
        a = np.array(values, dtype=np.uint64, copy=True, order="C")
    else:
        a = values  # type: ignore[assignment]
        if not (
            isinstance(a, np.ndarray)
            and a.dtype == np.uint64
            and a.flags.c_contiguous
            and a.flags.writeable
        ):
            raise DomainError("in-place transform needs a writable C-contiguous uint64 array")
    if a.ndim < 1 or a.shape[-1] != table.n:
        raise DomainError(f"last axis {a.shape[-1:]} does not match table length {table.n}")
    return a


def ntt_forward_array(
    values: npt.ArrayLike,
    table: TwiddleTable,
    access_log: list[int] | None = None,
    copy: bool = True,
) -> U64Array:
    """
    Forward negacyclic NTT over the last axis.

    Slot k of the output holds A(psi^(2*bitrev(k) + 1)).

    Args:
        values: Residues below p, shape (..., n)
        table: Twiddles for the modulus
        access_log: If given, receives every forward-table index read
        copy: Transform a copy (default) or the input array itself

    Returns:
        Transformed array of the same shape
    """
    a = _prepare(values, table, copy)
    n = table.n
    batch = a.shape[:-1]
    m = table.modulus
    groups = 1
    while groups < n:
        half = n // (2 * groups)
        view = a.reshape(*batch, groups, 2, half)
        w = table.forward[groups : 2 * groups, None]
        if access_log is not None:
            access_log.extend(range(groups, 2 * groups))
        u = view[..., 0, :]
        v = mod_mul_array(view[..., 1, :], w, m)
        top = mod_add_array(u, v, m)
        bottom = mod_sub_array(u, v, m)
        view[..., 0, :] = top
        view[..., 1, :] = bottom
        groups *= 2
    return a


def ntt_inverse_array(
    values: npt.ArrayLike,
    table: TwiddleTable,
    access_log: list[int] | None = None,
    copy: bool = True,
    order: TwiddleOrder = TwiddleOrder.SCRAMBLED,
) -> U64Array:
    """
    Inverse negacyclic NTT over the last axis, including the n^-1 scaling.

    With scrambled twiddles the stage with h groups reads the next h entries
    of ``inverse_scrambled``; ``order=LOGICAL`` gathers the same factors from
    the descrambled table instead.

    Args:
        values: Bit-reversed NTT slots, shape (..., n)
        table: Twiddles for the modulus
        access_log: If given, receives every inverse-table index read
        copy: Transform a copy (default) or the input array itself
        order: Which inverse-twiddle storage to read from

    Returns:
        Coefficients in natural order
    """
    a = _prepare(values, table, copy)
    n = table.n
    batch = a.shape[:-1]
    m = table.modulus
    logical = table.descramble_inverse() if order is TwiddleOrder.LOGICAL else None
    width = table.log2n
    cursor = 1
    groups = n // 2
    half = 1
    while groups >= 1:
        view = a.reshape(*batch, groups, 2, half)
        if logical is None:
            indices = list(range(cursor, cursor + groups))
            w = table.inverse_scrambled[cursor : cursor + groups, None]
        else:
            indices = [bit_reverse(groups + i, width) - 1 for i in range(groups)]
            w = logical[indices][:, None]
        if access_log is not None:
            access_log.extend(indices)
        u = view[..., 0, :]
        v = view[..., 1, :]
        top = mod_add_array(u, v, m)
        bottom = mod_mul_array(mod_sub_array(u, v, m), w, m)
        view[..., 0, :] = top
        view[..., 1, :] = bottom
        cursor += groups
        groups //= 2
        half *= 2
    a[...] = mod_mul_array(a, np.uint64(table.n_inv), m)
    return a


def _check_table(sub: SubPolynomial, table: TwiddleTable) -> None:
    if sub.n != table.n:
        raise DomainError(f"sub-polynomial length {sub.n} does not match table length {table.n}")
    if sub.modulus != table.modulus:
        raise DomainError(f"twiddles for {table.modulus.p} used with modulus {sub.modulus.p}")


def ntt_forward(
    sub: SubPolynomial, table: TwiddleTable, access_log: list[int] | None = None
) -> SubPolynomial:
    """
    Transform a coefficient-form sub-polynomial into bit-reversed NTT form.

    Raises:
        DomainError: If the input is already in the NTT domain or shapes differ
    """
    if sub.domain is not Domain.COEFFICIENT:
        raise DomainError("ntt_forward needs a coefficient-form input")
    _check_table(sub, table)
    slots = ntt_forward_array(sub.coeffs, table, access_log)
    return sub.with_coeffs(slots, Domain.NTT_BIT_REVERSED)


def ntt_inverse(
    sub: SubPolynomial, table: TwiddleTable, access_log: list[int] | None = None
) -> SubPolynomial:
    """
    Transform bit-reversed NTT slots back to coefficients.

    Raises:
        DomainError: If the input is in coefficient form or shapes differ
    """
    if sub.domain is not Domain.NTT_BIT_REVERSED:
        raise DomainError("ntt_inverse needs an NTT-domain input")
    _check_table(sub, table)
    coeffs = ntt_inverse_array(sub.coeffs, table, access_log)
    return sub.with_coeffs(coeffs, Domain.COEFFICIENT)


def _check_tables(poly: RnsPolynomial, tables: Sequence[TwiddleTable]) -> None:
    if len(tables) != poly.k:
        raise DomainError(f"expected {poly.k} twiddle tables, got {len(tables)}")
    for table, m in zip(tables, poly.base.moduli, strict=True):
        if table.modulus != m or table.n != poly.n:
            raise DomainError(f"twiddle table for {table.modulus.p} does not match the base")


def ntt_forward_poly(poly: RnsPolynomial, tables: Sequence[TwiddleTable]) -> RnsPolynomial:
    """Forward NTT of every sub-polynomial, each under its own modulus."""
    if poly.domain is not Domain.COEFFICIENT:
        raise DomainError("ntt_forward_poly needs a coefficient-form input")
    _check_tables(poly, tables)
    rows = [ntt_forward_array(poly.residues[i], t) for i, t in enumerate(tables)]
    return RnsPolynomial(base=poly.base, residues=np.stack(rows), domain=Domain.NTT_BIT_REVERSED)


def ntt_inverse_poly(poly: RnsPolynomial, tables: Sequence[TwiddleTable]) -> RnsPolynomial:
    """Inverse NTT of every sub-polynomial, each under its own modulus."""
    if poly.domain is not Domain.NTT_BIT_REVERSED:
        raise DomainError("ntt_inverse_poly needs an NTT-domain input")
    _check_tables(poly, tables)
    rows = [ntt_inverse_array(poly.residues[i], t) for i, t in enumerate(tables)]
    return RnsPolynomial(base=poly.base, residues=np.stack(rows), domain=Domain.COEFFICIENT)
