"""Residue number system: split big coefficients into 32-bit residues and back."""

from __future__ import annotations

import logging
import math
from collections.abc import Sequence
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ..config import format_key_value, load_config, parse_key_value
from ..errors import ConfigError, DomainError
from .modarith import (
    ResidueModulus,
    U64Array,
    find_ntt_prime,
    find_primitive_2n_root,
    is_power_of_two,
    mod_inverse,
)

logger = logging.getLogger(__name__)

# Width of the generated residue primes; leaves headroom below the 64-bit Barrett shift.
RESIDUE_BITS = 30
MIN_COEFFICIENT_BITS = 17

# Coefficient sizes targeting 128-bit security per polynomial length.
DEFAULT_COEFFICIENT_BITS = {
    1024: 27,
    2048: 54,
    4096: 109,
    8192: 218,
}
STANDARD_LENGTHS = tuple(DEFAULT_COEFFICIENT_BITS)


def default_coefficient_bits(n: int) -> int:
    """Default coefficient size for a polynomial length (27 below 1024)."""
    if n in DEFAULT_COEFFICIENT_BITS:
        return DEFAULT_COEFFICIENT_BITS[n]
    if n < min(DEFAULT_COEFFICIENT_BITS):
        return DEFAULT_COEFFICIENT_BITS[1024]
    raise DomainError(f"no default coefficient size for n={n}")


@dataclass(frozen=True)
class RnsBase:
    """Ordered pairwise-coprime moduli with CRT precomputation.

    Attributes:
        moduli: m_1 .. m_k
        big_modulus: M, the product of all m_i
        crt_weights: per modulus (M_i = M / m_i, N_i = M_i^-1 mod m_i)
    """

    moduli: tuple[ResidueModulus, ...]
    big_modulus: int
    crt_weights: tuple[tuple[int, int], ...]

    def __post_init__(self) -> None:
        if not self.moduli:
            raise DomainError("an RNS base needs at least one modulus")
        primes = self.primes
        for i, a in enumerate(primes):
            for b in primes[i + 1 :]:
                if math.gcd(a, b) != 1:
                    raise DomainError(f"moduli {a} and {b} are not coprime")
        if self.big_modulus != math.prod(primes):
            raise DomainError("big modulus is not the product of the moduli")
        for m, (big_i, inv_i) in zip(self.moduli, self.crt_weights, strict=True):
            if (big_i % m.p) * inv_i % m.p != 1:
                raise DomainError(f"CRT weight for {m.p} is inconsistent")

    @classmethod
    def from_moduli(cls, moduli: Sequence[ResidueModulus]) -> RnsBase:
        """Build a base and its CRT weights from moduli."""
        moduli = tuple(moduli)
        if not moduli:
            raise DomainError("an RNS base needs at least one modulus")
        big_modulus = math.prod(m.p for m in moduli)
        weights = []
        for m in moduli:
            big_i = big_modulus // m.p
            weights.append((big_i, mod_inverse(big_i % m.p, m)))
        return cls(moduli=moduli, big_modulus=big_modulus, crt_weights=tuple(weights))

    @property
    def k(self) -> int:
        return len(self.moduli)

    @property
    def primes(self) -> tuple[int, ...]:
        return tuple(m.p for m in self.moduli)

    @property
    def bits(self) -> int:
        """Bit length of M."""
        return self.big_modulus.bit_length()

    def supports_length(self, n: int) -> bool:
        """Whether every modulus admits a length-n negacyclic NTT."""
        return is_power_of_two(n) and all((m.p - 1) % (2 * n) == 0 for m in self.moduli)

    def column(self, values: Sequence[int]) -> U64Array:
        """Per-modulus scalars as a (k, 1) column for broadcasting."""
        return np.asarray(values, dtype=np.uint64).reshape(self.k, 1)

    def __str__(self) -> str:
        return f"RNS base k={self.k}, {self.bits}-bit M: {', '.join(map(str, self.primes))}"


def build_base(n: int, total_bits: int) -> RnsBase:
    """
    Build an RNS base of NTT-friendly primes covering total_bits.

    Uses k = ceil(total_bits / 30) of the largest 30-bit primes p = 1 (mod 2n),
    adding one more prime in the rare case the product falls short.

    Args:
        n: Polynomial length (power of two)
        total_bits: Coefficient modulus width to cover

    Returns:
        RnsBase with M of at least total_bits bits

    Raises:
        PrimeExhaustionError: If not enough primes exist
    """
    if total_bits < MIN_COEFFICIENT_BITS:
        raise DomainError(f"total_bits must be at least {MIN_COEFFICIENT_BITS}")
    if not is_power_of_two(n):
        raise DomainError(f"polynomial length {n} is not a power of two")
    k = math.ceil(total_bits / RESIDUE_BITS)
    moduli = [find_ntt_prime(n, RESIDUE_BITS, i) for i in range(k)]
    while math.prod(m.p for m in moduli).bit_length() < total_bits:
        moduli.append(find_ntt_prime(n, RESIDUE_BITS, len(moduli)))
    base = RnsBase.from_moduli(moduli)
    logger.info(f"Built RNS base for n={n}, {total_bits} bits: k={base.k}, M has {base.bits} bits")
    return base


def decompose(x: int, base: RnsBase) -> tuple[int, ...]:
    """
    Split x into its residues x_i = x mod m_i.

    Raises:
        DomainError: If x is outside [0, M)
    """
    if not 0 <= x < base.big_modulus:
        raise DomainError(f"value outside [0, M) for {base.k}-modulus base")
    return tuple(x % p for p in base.primes)


def reconstruct(residues: Sequence[int], base: RnsBase) -> int:
    """
    Recombine residues with the CRT: x = sum(x_i * M_i * N_i) mod M.

    Raises:
        DomainError: If a residue is out of range or the count is wrong
    """
    if len(residues) != base.k:
        raise DomainError(f"expected {base.k} residues, got {len(residues)}")
    total = 0
    for x_i, m, (big_i, inv_i) in zip(residues, base.moduli, base.crt_weights, strict=True):
        x_i = int(x_i)
        if not 0 <= x_i < m.p:
            raise DomainError(f"residue {x_i} out of range for modulus {m.p}")
        total += x_i * big_i * inv_i
    return total % base.big_modulus


def decompose_many(values: Sequence[int], base: RnsBase) -> U64Array:
    """Decompose a sequence of big integers into a (k, len) residue array."""
    out = np.empty((base.k, len(values)), dtype=np.uint64)
    for j, x in enumerate(values):
        out[:, j] = decompose(int(x), base)
    return out


def reconstruct_many(residues: U64Array, base: RnsBase) -> list[int]:
    """Reconstruct every column of a (k, len) residue array."""
    if residues.ndim != 2 or residues.shape[0] != base.k:
        raise DomainError(f"expected a ({base.k}, len) residue array")
    return [reconstruct([int(v) for v in residues[:, j]], base) for j in range(residues.shape[1])]


def base_to_config(base: RnsBase, n: int, total_bits: int) -> str:
    """
    Describe a base as key=value text, including Barrett factors and roots.

    Only ``n``, ``bits`` and ``moduli`` are read back; the rest documents the
    values a host would precompute and upload.
    """
    values: dict[str, object] = {
        "n": n,
        "bits": total_bits,
        "moduli": ",".join(str(p) for p in base.primes),
    }
    for i, m in enumerate(base.moduli):
        values[f"barrett.{i}"] = m.barrett_factor
    for i, m in enumerate(base.moduli):
        values[f"psi.{i}"] = find_primitive_2n_root(m, n)
    return format_key_value(values, header="pimring RNS base")


def base_from_config(text: str, source: str = "<base>") -> tuple[RnsBase, int, int]:
    """
    Rebuild a base from key=value text written by base_to_config.

    Returns:
        (base, n, total_bits)
    """
    values = parse_key_value(text, source=source)
    try:
        n = int(values["n"])
        total_bits = int(values["bits"])
        primes = [int(p) for p in values["moduli"].split(",") if p.strip()]
    except (KeyError, ValueError) as e:
        raise ConfigError(f"{source}: base config needs n, bits and moduli ({e})") from e
    try:
        base = RnsBase.from_moduli([ResidueModulus.from_prime(p, 2 * n) for p in primes])
    except DomainError as e:
        raise ConfigError(f"{source}: {e}") from e
    if base.bits < total_bits:
        raise ConfigError(f"{source}: moduli cover {base.bits} bits, need {total_bits}")
    return base, n, total_bits


def load_base_config(path: str | Path) -> tuple[RnsBase, int, int]:
    """Read a base config file."""
    path = Path(path)
    values = load_config(path)
    return base_from_config(format_key_value(values), source=str(path))
