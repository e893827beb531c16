"""Exception hierarchy for pimring."""

from __future__ import annotations


class PimRingError(Exception):
    """Base class for all pimring errors."""


class DomainError(PimRingError, ValueError):
    """An input is outside the domain of an operation (shape, range or NTT domain)."""


class PrimeExhaustionError(PimRingError):
    """No further NTT-friendly prime exists in the requested range."""

    def __init__(self, n: int, bit_size: int, found: int):
        self.n = n
        self.bit_size = bit_size
        self.found = found
        super().__init__(
            f"only {found} prime(s) p < 2^{bit_size} with p = 1 (mod {2 * n}) exist; "
            f"there are not enough such primes at this width for length-{n} negacyclic "
            f"NTTs, use wider residues"
        )


class PlanningError(PimRingError):
    """A work plan cannot be built for the requested platform."""


class CapacityError(PimRingError):
    """Data does not fit into the modeled DPU memory."""


class ConfigError(PimRingError, ValueError):
    """A key=value configuration file is malformed."""


class ImageParseError(PimRingError, ValueError):
    """An interface image could not be decoded."""


class TruncatedImageError(ImageParseError):
    """The buffer ends before the header or a section does."""


class InvalidMagicError(ImageParseError):
    """The buffer does not start with the interface magic."""


class UnsupportedVersionError(ImageParseError):
    """The header carries an unknown format version."""


class OffsetOutOfRangeError(ImageParseError):
    """A section offset points beyond the buffer."""

    def __init__(self, section: str, message: str):
        self.section = section
        super().__init__(f"{section}: {message}")


class NonMonotoneOffsetsError(ImageParseError):
    """Section offsets overlap or are out of order."""


class MalformedImageError(ImageParseError):
    """The header or a section violates a structural invariant."""


class ExecutionError(PimRingError):
    """A command in an interface image cannot be executed."""

    def __init__(self, ordinal: int, message: str):
        self.ordinal = ordinal
        super().__init__(f"command #{ordinal}: {message}")
