"""Randomized correctness suites behind the ``verify`` command.

Each suite draws its inputs from ``numpy.random.default_rng(seed + trial)``,
so a reported failing seed reproduces the exact inputs.
"""

from __future__ import annotations

import logging
from collections.abc import Callable
from dataclasses import dataclass, field

import numpy as np

from ..ring.modarith import mod_mul_array
from ..ring.ntt import (
    TwiddleTable,
    build_base_twiddles,
    ntt_forward_array,
    ntt_forward_poly,
    ntt_inverse_array,
    ntt_inverse_poly,
)
from ..ring.polyring import RnsPolynomial, SubPolynomial, schoolbook_negacyclic_mul
from ..ring.rns import RnsBase, build_base, decompose

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class CheckResult:
    """Outcome of one suite."""

    name: str
    trials: int
    passed: bool
    failing_seed: int | None = None
    detail: str = ""


@dataclass
class VerifyReport:
    n: int
    bits: int
    base: RnsBase
    results: list[CheckResult] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.results)

    @property
    def first_failure(self) -> CheckResult | None:
        return next((r for r in self.results if not r.passed), None)


def corrupt_tables(tables: tuple[TwiddleTable, ...]) -> tuple[TwiddleTable, ...]:
    """Copies of the tables with one forward twiddle off by one, for exercising failures."""
    bad = []
    for table in tables:
        forward = table.forward.copy()
        forward[1] = (int(forward[1]) + 1) % table.modulus.p
        bad.append(
            TwiddleTable(
                modulus_index=table.modulus_index,
                modulus=table.modulus,
                psi=table.psi,
                forward=forward,
                inverse_scrambled=table.inverse_scrambled,
                n_inv=table.n_inv,
            )
        )
    return tuple(bad)


def _check_round_trip(rng: np.random.Generator, base: RnsBase, n: int, tables) -> str | None:
    poly = RnsPolynomial.random(base, n, rng)
    back = ntt_inverse_poly(ntt_forward_poly(poly, tables), tables)
    if back != poly:
        return "inverse NTT of the forward NTT differs from the input"
    return None


def _check_convolution(rng: np.random.Generator, base: RnsBase, n: int, tables) -> str | None:
    for i, (m, table) in enumerate(zip(base.moduli, tables, strict=True)):
        a = rng.integers(0, m.p, size=n, dtype=np.uint64)
        b = rng.integers(0, m.p, size=n, dtype=np.uint64)
        fa = ntt_forward_array(a, table)
        fb = ntt_forward_array(b, table)
        product = ntt_inverse_array(mod_mul_array(fa, fb, m), table)
        expected = schoolbook_negacyclic_mul(
            SubPolynomial(coeffs=a, modulus_index=i, modulus=m),
            SubPolynomial(coeffs=b, modulus_index=i, modulus=m),
        )
        if not np.array_equal(product, expected.coeffs):
            return f"NTT product differs from the schoolbook product modulo {m.p}"
    return None


def _random_below(rng: np.random.Generator, bound: int) -> int:
    return int.from_bytes(rng.bytes(bound.bit_length() // 8 + 8), "little") % bound


def _check_crt(rng: np.random.Generator, base: RnsBase, n: int, tables) -> str | None:
    big = base.big_modulus
    for _ in range(16):
        x = _random_below(rng, big)
        y = _random_below(rng, big)
        xs, ys = decompose(x, base), decompose(y, base)
        added = tuple((a + b) % p for a, b, p in zip(xs, ys, base.primes, strict=True))
        multiplied = tuple(a * b % p for a, b, p in zip(xs, ys, base.primes, strict=True))
        if decompose((x + y) % big, base) != added:
            return "residue-wise addition does not match addition modulo M"
        if decompose(x * y % big, base) != multiplied:
            return "residue-wise multiplication does not match multiplication modulo M"
    return None


def _check_sequential_access(rng: np.random.Generator, base: RnsBase, n: int, tables) -> str | None:
    table = tables[0]
    slots = ntt_forward_array(rng.integers(0, table.modulus.p, size=n, dtype=np.uint64), table)
    log: list[int] = []
    ntt_inverse_array(slots, table, access_log=log)
    if any(b <= a for a, b in zip(log, log[1:])):
        return "inverse twiddles were not read sequentially"
    return None


Suite = Callable[[np.random.Generator, RnsBase, int, tuple[TwiddleTable, ...]], "str | None"]

SUITES: dict[str, Suite] = {
    "ntt-round-trip": _check_round_trip,
    "convolution-theorem": _check_convolution,
    "crt-homomorphism": _check_crt,
    "sequential-inverse-twiddles": _check_sequential_access,
}


def verify(
    n: int,
    bits: int,
    trials: int,
    seed: int = 0,
    corrupt_twiddles: bool = False,
) -> VerifyReport:
    """
    Run every suite for ``trials`` seeds.

    Args:
        n: Polynomial length
        bits: Coefficient modulus width
        trials: Random trials per suite
        seed: First seed; trial t uses seed + t
        corrupt_twiddles: Deliberately break one twiddle so the suites must fail

    Returns:
        VerifyReport naming the first failing seed of each failing suite
    """
    base = build_base(n, bits)
    tables = build_base_twiddles(base, n)
    if corrupt_twiddles:
        logger.warning("Verifying with deliberately corrupted twiddles")
        tables = corrupt_tables(tables)
    if trials == 0:
        logger.warning("trials=0: nothing to verify")

    report = VerifyReport(n=n, bits=bits, base=base)
    for name, suite in SUITES.items():
        result = CheckResult(name=name, trials=trials, passed=True)
        for t in range(trials):
            trial_seed = seed + t
            problem = suite(np.random.default_rng(trial_seed), base, n, tables)
            if problem is not None:
                result = CheckResult(
                    name=name, trials=t + 1, passed=False, failing_seed=trial_seed, detail=problem
                )
                logger.error(f"{name} failed at seed {trial_seed}: {problem}")
                break
        else:
            logger.info(f"{name}: {trials} trial(s) passed")
        report.results.append(result)
    return report
