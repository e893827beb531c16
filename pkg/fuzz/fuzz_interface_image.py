#!/usr/bin/env python3
"""Atheris fuzzer for the interface image decoder.

Any input must either raise ImageParseError or decode into an image that
re-encodes to exactly the same bytes. Roughly half the inputs start from a
valid image with a few bytes overwritten, so the fuzzer gets past the magic
and header checks quickly.

    pip install -e ".[fuzz]"
    python fuzz/fuzz_interface_image.py -atheris_runs=100000
"""

import logging
import sys

import atheris
import numpy as np

with atheris.instrument_imports(include=["pimring"]):
    from pimring.errors import ImageParseError
    from pimring.pim.interface import Command, decode_image, encode_image
    from pimring.ring.modarith import find_ntt_prime
    from pimring.ring.ntt import build_twiddles

logging.disable(logging.CRITICAL)

_TABLE = build_twiddles(find_ntt_prime(8, 30), 8)
_SEED = encode_image(
    _TABLE,
    [Command.ntt_fwd(0, 0), Command.bgv_mul(0, 2, 4), Command.ntt_inv(4, 4)],
    np.arange(7 * 8, dtype=np.uint64).reshape(7, 8),
)


def _mutated_seed(fdp: atheris.FuzzedDataProvider) -> bytes:
    data = bytearray(_SEED)
    for _ in range(fdp.ConsumeIntInRange(1, 8)):
        data[fdp.ConsumeIntInRange(0, len(data) - 1)] = fdp.ConsumeInt(1) & 0xFF
    return bytes(data[: fdp.ConsumeIntInRange(0, len(data))])


def TestOneInput(data: bytes) -> None:
    fdp = atheris.FuzzedDataProvider(data)
    image_bytes = _mutated_seed(fdp) if fdp.ConsumeBool() else fdp.ConsumeBytes(fdp.remaining_bytes())
    try:
        image = decode_image(image_bytes)
    except ImageParseError:
        return
    if image.encode() != image_bytes:
        raise AssertionError("decoded image does not re-encode to its input")


def main() -> None:
    atheris.Setup(sys.argv, TestOneInput)
    atheris.Fuzz()


if __name__ == "__main__":
    main()
