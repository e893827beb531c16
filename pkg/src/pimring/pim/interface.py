"""Binary CPU-DPU interface image: one buffer per DPU holding everything it runs.

Layout (all integers little-endian)::

    0   magic            4 bytes  b"DRMH"
    4   version          u32      1
    8   n                u64
    16  p                u64
    24  n_inv            u64
    32  num_commands     u64
    40  offset_twiddles  u64      in 8-byte words from the start of main data
    48  offset_commands  u64
    56  offset_subpolys  u64
    64  barrett_factor   u64      floor(2^64 / p)
    72  num_subpolys     u64
    80  main data

Twiddles are the forward table then the scrambled inverse table, n u32 each.
A command is 32 bytes: opcode u32, padding u32, src1/src2/dst u64. Each
sub-polynomial is n u32 residues. See docs/interface-format.md.
"""

from __future__ import annotations

import logging
import struct
from collections.abc import Sequence
from dataclasses import dataclass
from enum import IntEnum

import numpy as np
import numpy.typing as npt

from ..errors import (
    CapacityError,
    DomainError,
    ExecutionError,
    InvalidMagicError,
    MalformedImageError,
    NonMonotoneOffsetsError,
    OffsetOutOfRangeError,
    TruncatedImageError,
    UnsupportedVersionError,
)
from ..ring.modarith import ResidueModulus, U64Array, mod_add_array, mod_mul_array
from ..ring.ntt import TwiddleTable, build_twiddles, ntt_forward_array, ntt_inverse_array
from ..ring.polyring import BgvProduct, Ciphertext, Domain, RnsPolynomial, SubPolynomial
from ..ring.rns import RnsBase
from .model import INTERFACE_HEADER_BYTES, RESIDUE_BYTES, DpuModel
from .simulator import capacity

logger = logging.getLogger(__name__)

MAGIC = b"DRMH"
VERSION = 1
WORD_BYTES = 8
SENTINEL = (1 << 64) - 1

_HEADER = struct.Struct("<4sI9Q")
_COMMAND = struct.Struct("<II3Q")
COMMAND_BYTES = _COMMAND.size

assert _HEADER.size == INTERFACE_HEADER_BYTES


class Opcode(IntEnum):
    NTT_FWD = 1
    NTT_INV = 2
    POINTWISE_MUL = 3
    POINTWISE_ADD = 4
    BGV_MUL = 5

    @property
    def unary(self) -> bool:
        return self in (Opcode.NTT_FWD, Opcode.NTT_INV)


@dataclass(frozen=True)
class Command:
    """One fixed-width command; unused operand slots hold SENTINEL."""

    opcode: Opcode
    src1: int
    dst: int
    src2: int = SENTINEL

    @classmethod
    def ntt_fwd(cls, src: int, dst: int) -> Command:
        return cls(Opcode.NTT_FWD, src, dst)

    @classmethod
    def ntt_inv(cls, src: int, dst: int) -> Command:
        return cls(Opcode.NTT_INV, src, dst)

    @classmethod
    def pointwise_mul(cls, src1: int, src2: int, dst: int) -> Command:
        return cls(Opcode.POINTWISE_MUL, src1, dst, src2)

    @classmethod
    def pointwise_add(cls, src1: int, src2: int, dst: int) -> Command:
        return cls(Opcode.POINTWISE_ADD, src1, dst, src2)

    @classmethod
    def bgv_mul(cls, lhs: int, rhs: int, dst: int) -> Command:
        """Reads lhs, lhs+1 and rhs, rhs+1; writes dst, dst+1, dst+2."""
        return cls(Opcode.BGV_MUL, lhs, dst, rhs)

    def reads(self) -> list[int]:
        if self.opcode.unary:
            return [self.src1]
        if self.opcode is Opcode.BGV_MUL:
            return [self.src1, self.src1 + 1, self.src2, self.src2 + 1]
        return [self.src1, self.src2]

    def writes(self) -> list[int]:
        if self.opcode is Opcode.BGV_MUL:
            return [self.dst, self.dst + 1, self.dst + 2]
        return [self.dst]

    def pack(self) -> bytes:
        return _COMMAND.pack(int(self.opcode), 0, self.src1, self.src2, self.dst)


@dataclass(frozen=True)
class InterfaceHeader:
    """Decoded header fields; offsets are in 8-byte words into the main data."""

    n: int
    p: int
    n_inv: int
    num_commands: int
    offset_twiddles: int
    offset_commands: int
    offset_subpolys: int
    barrett_factor: int
    num_subpolys: int
    version: int = VERSION

    def pack(self) -> bytes:
        return _HEADER.pack(
            MAGIC,
            self.version,
            self.n,
            self.p,
            self.n_inv,
            self.num_commands,
            self.offset_twiddles,
            self.offset_commands,
            self.offset_subpolys,
            self.barrett_factor,
            self.num_subpolys,
        )

    def sections(self) -> list[tuple[str, int, int]]:
        """(name, start byte, end byte) of each section within the main data."""
        sizes = (
            ("twiddles", self.offset_twiddles, 2 * RESIDUE_BYTES * self.n),
            ("commands", self.offset_commands, COMMAND_BYTES * self.num_commands),
            ("subpolys", self.offset_subpolys, RESIDUE_BYTES * self.n * self.num_subpolys),
        )
        return [(name, word * WORD_BYTES, word * WORD_BYTES + size) for name, word, size in sizes]

    @property
    def main_data_bytes(self) -> int:
        return self.sections()[-1][2]

    @property
    def total_bytes(self) -> int:
        return INTERFACE_HEADER_BYTES + self.main_data_bytes


@dataclass(eq=False)
class InterfaceImage:
    """
    Structured view of an image.

    ``subpolys`` is a writable (num_subpolys, n) array; the image's domain
    bookkeeping is left to the command program.
    """

    header: InterfaceHeader
    twiddles: TwiddleTable
    commands: tuple[Command, ...]
    subpolys: U64Array

    @property
    def modulus(self) -> ResidueModulus:
        return self.twiddles.modulus

    def subpoly(self, index: int, domain: Domain = Domain.COEFFICIENT) -> SubPolynomial:
        return SubPolynomial(
            coeffs=self.subpolys[index],
            modulus_index=self.twiddles.modulus_index,
            modulus=self.modulus,
            domain=domain,
        )

    def encode(self, model: DpuModel | None = None) -> bytes:
        """Encode at the offsets recorded in the header."""
        return encode_image(
            self.twiddles,
            self.commands,
            self.subpolys,
            byte_offsets=(
                self.header.offset_twiddles * WORD_BYTES,
                self.header.offset_commands * WORD_BYTES,
                self.header.offset_subpolys * WORD_BYTES,
            ),
            model=model,
        )

    def same_structure(self, other: InterfaceImage) -> bool:
        """Equal header, twiddles, commands and sub-polynomials."""
        return (
            self.header == other.header
            and self.commands == other.commands
            and np.array_equal(self.twiddles.forward, other.twiddles.forward)
            and np.array_equal(self.twiddles.inverse_scrambled, other.twiddles.inverse_scrambled)
            and np.array_equal(self.subpolys, other.subpolys)
        )


def _as_subpoly_array(subpolys: npt.ArrayLike | Sequence[SubPolynomial], n: int) -> U64Array:
    if isinstance(subpolys, np.ndarray):
        arr = subpolys.astype(np.uint64, copy=False)
    else:
        rows = [s.coeffs if isinstance(s, SubPolynomial) else s for s in subpolys]
        arr = np.array(rows, dtype=np.uint64).reshape(len(rows), n)
    if arr.ndim != 2 or arr.shape[1] != n:
        raise DomainError(f"sub-polynomials must have shape (count, {n})")
    return arr


def _layout_header(
    twiddles: TwiddleTable,
    num_commands: int,
    num_subpolys: int,
    byte_offsets: tuple[int, int, int] | None,
) -> InterfaceHeader:
    n = twiddles.n
    if byte_offsets is None:
        tw = 0
        cmd = tw + 2 * RESIDUE_BYTES * n
        sub = cmd + COMMAND_BYTES * num_commands
        byte_offsets = (tw, cmd, sub)
    for name, offset in zip(("twiddles", "commands", "subpolys"), byte_offsets, strict=True):
        if offset < 0 or offset % WORD_BYTES:
            raise DomainError(f"{name} offset {offset} is not 8-byte aligned")
    header = InterfaceHeader(
        n=n,
        p=twiddles.modulus.p,
        n_inv=twiddles.n_inv,
        barrett_factor=twiddles.modulus.barrett_factor,
        num_commands=num_commands,
        num_subpolys=num_subpolys,
        offset_twiddles=byte_offsets[0] // WORD_BYTES,
        offset_commands=byte_offsets[1] // WORD_BYTES,
        offset_subpolys=byte_offsets[2] // WORD_BYTES,
    )
    previous_end = 0
    for name, start, end in header.sections():
        if start < previous_end:
            raise DomainError(f"{name} section overlaps the previous section")
        previous_end = end
    return header


def encode_image(
    twiddles: TwiddleTable,
    commands: Sequence[Command],
    subpolys: npt.ArrayLike | Sequence[SubPolynomial],
    *,
    byte_offsets: tuple[int, int, int] | None = None,
    model: DpuModel | None = None,
) -> bytes:
    """
    Encode an interface image.

    The header's n, p, n_inv and Barrett factor come from the twiddle table.
    Sections are packed back to back unless byte offsets are requested.

    Args:
        twiddles: Table for the DPU's modulus
        commands: Program to run, in order
        subpolys: Sub-polynomials under the same modulus, shape (count, n)
        byte_offsets: Optional (twiddles, commands, subpolys) offsets into the
            main data; each must be 8-byte aligned and not overlap its predecessor
        model: DPU whose usable MRAM bounds the image

    Returns:
        The image bytes

    Raises:
        CapacityError: If the image exceeds the usable MRAM
    """
    model = model or DpuModel()
    n = twiddles.n
    subs = _as_subpoly_array(subpolys, n)
    if subs.size and int(subs.max()) >= twiddles.modulus.p:
        raise DomainError(f"sub-polynomial residue not reduced modulo {twiddles.modulus.p}")
    header = _layout_header(twiddles, len(commands), subs.shape[0], byte_offsets)
    if header.total_bytes > model.usable_mram_bytes:
        raise CapacityError(
            f"image of {header.total_bytes} bytes exceeds {model.usable_mram_bytes} usable "
            f"MRAM bytes; capacity() allows {capacity(n, model)} sub-polynomials of length {n}"
        )

    main = bytearray(header.main_data_bytes)
    (_, tw_start, _), (_, cmd_start, _), (_, sub_start, sub_end) = header.sections()
    tables = np.concatenate([twiddles.forward, twiddles.inverse_scrambled]).astype("<u4")
    main[tw_start : tw_start + tables.nbytes] = tables.tobytes()
    for i, command in enumerate(commands):
        at = cmd_start + i * COMMAND_BYTES
        main[at : at + COMMAND_BYTES] = command.pack()
    main[sub_start:sub_end] = subs.astype("<u4").tobytes()
    return header.pack() + bytes(main)


def build_image(
    twiddles: TwiddleTable,
    commands: Sequence[Command],
    subpolys: npt.ArrayLike | Sequence[SubPolynomial],
) -> InterfaceImage:
    """Packed in-memory image; ``image.encode()`` yields its bytes."""
    subs = np.array(_as_subpoly_array(subpolys, twiddles.n), dtype=np.uint64, copy=True)
    header = _layout_header(twiddles, len(commands), subs.shape[0], None)
    return InterfaceImage(header=header, twiddles=twiddles, commands=tuple(commands), subpolys=subs)


def _read_u32s(data: memoryview, start: int, count: int) -> U64Array:
    if count == 0:
        return np.zeros(0, dtype=np.uint64)
    return np.frombuffer(data, dtype="<u4", count=count, offset=start).astype(np.uint64)


def decode_image(data: bytes, modulus_index: int = 0) -> InterfaceImage:
    """
    Decode and validate an interface image.

    Raises:
        TruncatedImageError: Buffer shorter than the header
        InvalidMagicError: Wrong magic
        UnsupportedVersionError: Unknown version
        OffsetOutOfRangeError: A section extends past the buffer
        NonMonotoneOffsetsError: Sections overlap or are out of order
        MalformedImageError: Any other structural violation
    """
    if len(data) < INTERFACE_HEADER_BYTES:
        raise TruncatedImageError(f"{len(data)} bytes is shorter than the {INTERFACE_HEADER_BYTES}-byte header")
    magic, version, *fields = _HEADER.unpack_from(data)
    if magic != MAGIC:
        raise InvalidMagicError(f"bad magic {magic!r}")
    if version != VERSION:
        raise UnsupportedVersionError(f"unsupported version {version}")
    header = InterfaceHeader(*fields, version=version)

    n = header.n
    if n < 2 or n & (n - 1):
        raise MalformedImageError(f"polynomial length {n} is not a power of two >= 2")
    try:
        modulus = ResidueModulus(p=header.p, barrett_factor=header.barrett_factor, two_n=2 * n)
    except DomainError as e:
        raise MalformedImageError(f"modulus fields: {e}") from e
    if header.n_inv >= header.p or header.n_inv * n % header.p != 1:
        raise MalformedImageError(f"n_inv={header.n_inv} is not the inverse of {n}")

    main_len = len(data) - INTERFACE_HEADER_BYTES
    sections = header.sections()
    for name, _, end in sections:
        if end > main_len:
            raise OffsetOutOfRangeError(name, f"section ends at byte {end}, main data has {main_len}")
    previous_end = 0
    for name, start, end in sections:
        if start < previous_end:
            raise NonMonotoneOffsetsError(f"{name} section starts at byte {start}, before byte {previous_end}")
        previous_end = end
    if previous_end != main_len:
        raise MalformedImageError(f"{main_len - previous_end} trailing bytes after the last section")

    view = memoryview(data)[INTERFACE_HEADER_BYTES:]
    used = np.zeros(main_len, dtype=bool)
    for _, start, end in sections:
        used[start:end] = True
    if np.frombuffer(view, dtype=np.uint8)[~used].any():
        raise MalformedImageError("padding between sections is not zero")

    (_, tw_start, _), (_, cmd_start, _), (_, sub_start, _) = sections
    forward = _read_u32s(view, tw_start, n)
    inverse = _read_u32s(view, tw_start + RESIDUE_BYTES * n, n)
    try:
        twiddles = TwiddleTable(
            modulus_index=modulus_index,
            modulus=modulus,
            psi=int(forward[n // 2]),
            forward=forward,
            inverse_scrambled=inverse,
            n_inv=header.n_inv,
        )
    except DomainError as e:
        raise MalformedImageError(f"twiddles: {e}") from e

    commands = []
    for i in range(header.num_commands):
        raw_op, pad, src1, src2, dst = _COMMAND.unpack_from(view, cmd_start + i * COMMAND_BYTES)
        try:
            opcode = Opcode(raw_op)
        except ValueError as e:
            raise MalformedImageError(f"command #{i}: unknown opcode {raw_op}") from e
        if pad:
            raise MalformedImageError(f"command #{i}: nonzero padding")
        if opcode.unary and src2 != SENTINEL:
            raise MalformedImageError(f"command #{i}: unused operand slot is not the sentinel")
        commands.append(Command(opcode=opcode, src1=src1, dst=dst, src2=src2))

    count = header.num_subpolys
    subs = _read_u32s(view, sub_start, count * n).reshape(count, n)
    if subs.size and int(subs.max()) >= header.p:
        raise MalformedImageError(f"sub-polynomial residue not reduced modulo {header.p}")
    return InterfaceImage(header=header, twiddles=twiddles, commands=tuple(commands), subpolys=subs)


def execute_image(image: InterfaceImage) -> InterfaceImage:
    """
    Run an image's commands in order and return the resulting image.

    The input image is left untouched. All operands of a command are read
    before any of its results are written, so outputs may alias inputs.

    Raises:
        ExecutionError: If a command names a sub-polynomial outside the image
    """
    subs = image.subpolys.copy()
    count = subs.shape[0]
    table = image.twiddles
    m = table.modulus
    for ordinal, command in enumerate(image.commands):
        for index in command.reads() + command.writes():
            if not 0 <= index < count:
                raise ExecutionError(ordinal, f"sub-polynomial index {index} outside [0, {count})")
        op = command.opcode
        if op is Opcode.NTT_FWD:
            subs[command.dst] = ntt_forward_array(subs[command.src1], table)
        elif op is Opcode.NTT_INV:
            subs[command.dst] = ntt_inverse_array(subs[command.src1], table)
        elif op is Opcode.POINTWISE_MUL:
            subs[command.dst] = mod_mul_array(subs[command.src1], subs[command.src2], m)
        elif op is Opcode.POINTWISE_ADD:
            subs[command.dst] = mod_add_array(subs[command.src1], subs[command.src2], m)
        else:
            a0, a1, b0, b1 = (subs[i].copy() for i in command.reads())
            cross = mod_add_array(mod_mul_array(a0, b1, m), mod_mul_array(a1, b0, m), m)
            subs[command.dst] = mod_mul_array(a0, b0, m)
            subs[command.dst + 1] = cross
            subs[command.dst + 2] = mod_mul_array(a1, b1, m)
    logger.debug(f"Executed {len(image.commands)} command(s) on {count} sub-polynomial(s)")
    return InterfaceImage(
        header=image.header, twiddles=image.twiddles, commands=image.commands, subpolys=subs
    )


# Sub-polynomial slots used by image_for_ciphertexts.
LHS_SLOT = 0
RHS_SLOT = 2
PRODUCT_SLOT = 4


def image_for_ciphertexts(a: Ciphertext, b: Ciphertext, modulus_index: int) -> InterfaceImage:
    """
    Pack the residues of two coefficient-form ciphertexts under one modulus.

    The program transforms all four inputs, multiplies them into slots 4-6
    and inverse-transforms the three results.
    """
    if a.base != b.base or a.n != b.n:
        raise DomainError("ciphertexts differ in base or length")
    if a.domain is not Domain.COEFFICIENT or b.domain is not Domain.COEFFICIENT:
        raise DomainError("image_for_ciphertexts needs coefficient-form ciphertexts")
    m = a.base.moduli[modulus_index]
    table = build_twiddles(m, a.n, modulus_index)
    rows = [poly.residues[modulus_index] for poly in (a.c0, a.c1, b.c0, b.c1)]
    rows.extend(np.zeros(a.n, dtype=np.uint64) for _ in range(3))
    program = [Command.ntt_fwd(i, i) for i in range(4)]
    program.append(Command.bgv_mul(LHS_SLOT, RHS_SLOT, PRODUCT_SLOT))
    program.extend(Command.ntt_inv(PRODUCT_SLOT + j, PRODUCT_SLOT + j) for j in range(3))
    return build_image(table, program, rows)


def product_from_images(images: Sequence[InterfaceImage], base: RnsBase) -> BgvProduct:
    """Collect slots 4-6 of executed per-modulus images into a coefficient-form product."""
    if len(images) != base.k:
        raise DomainError(f"expected one image per modulus ({base.k}), got {len(images)}")
    polys = [
        RnsPolynomial(
            base=base,
            residues=np.stack([image.subpolys[PRODUCT_SLOT + j] for image in images]),
        )
        for j in range(3)
    ]
    return BgvProduct(*polys)
