"""Modulus-based work partitioning over DPUs.

Every unit of work is one sub-polynomial: a (ciphertext, modulus, role)
item. All roles of one ciphertext under one modulus stay on the same DPU, so
DPUs never need to talk to each other.
"""

from __future__ import annotations

import logging
from collections.abc import Sequence
from dataclasses import dataclass, field
from enum import Enum

from ..errors import DomainError, PlanningError
from ..ring.ntt import Threading
from .model import KernelKind, PlatformModel

logger = logging.getLogger(__name__)


class Strategy(Enum):
    """How moduli are spread over DPUs."""

    MODULUS_PARALLEL = "parallel"
    MODULUS_SEQUENTIAL = "sequential"
    AUTO = "auto"

    @classmethod
    def from_name(cls, name: str) -> Strategy:
        key = name.strip().lower().replace("-", "_")
        for member in cls:
            if key in (member.value, member.name.lower()):
                return member
        raise DomainError(f"unknown strategy {name!r}")


class Role(Enum):
    """Which polynomial of a ciphertext (or of the right-hand operand) an item holds."""

    CT0 = "ct0"
    CT1 = "ct1"
    RHS0 = "rhs0"
    RHS1 = "rhs1"


def roles_for(phases: Sequence[KernelKind]) -> tuple[Role, ...]:
    """A multiplication needs both operands resident; otherwise one ciphertext."""
    if KernelKind.BGV_MUL in phases:
        return (Role.CT0, Role.CT1, Role.RHS0, Role.RHS1)
    return (Role.CT0, Role.CT1)


@dataclass(frozen=True)
class WorkItem:
    ciphertext: int
    modulus: int
    role: Role


@dataclass
class WorkPlan:
    """
    Assignment of work items to DPUs.

    Attributes:
        strategy: Resolved strategy (never AUTO)
        num_ciphertexts: Ciphertexts (or multiplication pairs) planned
        k: Number of RNS moduli
        assignment: Items per DPU, indexed by DPU id
        group_sizes: DPUs per modulus group (one group spanning all DPUs when sequential)
        dpu_modulus: Modulus each DPU is configured for, None when sequential
        threading: Threading per kernel kind
    """

    strategy: Strategy
    num_ciphertexts: int
    k: int
    assignment: list[list[WorkItem]]
    group_sizes: tuple[int, ...]
    dpu_modulus: tuple[int | None, ...]
    roles: tuple[Role, ...] = (Role.CT0, Role.CT1)
    threading: dict[KernelKind, Threading] = field(default_factory=dict)

    @property
    def num_dpus(self) -> int:
        return len(self.assignment)

    @property
    def imbalanced(self) -> bool:
        """Modulus groups differ in size."""
        return len(set(self.group_sizes)) > 1

    def threading_for(self, kind: KernelKind) -> Threading:
        return self.threading.get(kind, Threading.COARSE_GRAINED)

    def ciphertexts_on(self, dpu: int, modulus: int) -> int:
        """Distinct ciphertexts a DPU holds under one modulus."""
        return len({item.ciphertext for item in self.assignment[dpu] if item.modulus == modulus})

    def validate(self) -> None:
        """
        Check the plan invariants.

        Raises:
            PlanningError: If an item is missing, duplicated or on a DPU
                configured for another modulus
        """
        seen: dict[tuple[int, int, Role], int] = {}
        for dpu, items in enumerate(self.assignment):
            for item in items:
                key = (item.ciphertext, item.modulus, item.role)
                if key in seen:
                    raise PlanningError(f"item {key} assigned to DPUs {seen[key]} and {dpu}")
                seen[key] = dpu
                expected = self.dpu_modulus[dpu]
                if expected is not None and item.modulus != expected:
                    raise PlanningError(f"DPU {dpu} holds modulus {item.modulus}, configured for {expected}")
        for c in range(self.num_ciphertexts):
            for i in range(self.k):
                owners = {seen.get((c, i, role)) for role in self.roles}
                if None in owners:
                    raise PlanningError(f"ciphertext {c} modulus {i} is not fully assigned")
                if len(owners) != 1:
                    raise PlanningError(f"ciphertext {c} modulus {i} is split over DPUs")


def resolve_strategy(strategy: Strategy, k: int, platform: PlatformModel) -> Strategy:
    """
    Turn AUTO into a concrete strategy.

    Modulus-parallel is chosen when the usable ranks split evenly into k
    groups; anything else runs the moduli one after another.
    """
    if strategy is not Strategy.AUTO:
        return strategy
    if platform.usable_ranks % k == 0 and platform.usable_dpus >= k:
        return Strategy.MODULUS_PARALLEL
    return Strategy.MODULUS_SEQUENTIAL


def _group_sizes(k: int, platform: PlatformModel) -> tuple[int, ...]:
    ranks = [size for size in platform.rank_sizes() if size > 0]
    if len(ranks) % k == 0:
        per_group = len(ranks) // k
        return tuple(sum(ranks[g * per_group : (g + 1) * per_group]) for g in range(k))
    base, extra = divmod(platform.usable_dpus, k)
    return tuple(base + (1 if g < extra else 0) for g in range(k))


def plan_work(
    num_ciphertexts: int,
    k: int,
    platform: PlatformModel,
    strategy: Strategy = Strategy.MODULUS_PARALLEL,
    phases: Sequence[KernelKind] = (),
    threading: Threading = Threading.COARSE_GRAINED,
) -> WorkPlan:
    """
    Partition ciphertext work over the platform's usable DPUs.

    Args:
        num_ciphertexts: Ciphertexts to process (pairs when BGV_MUL is a phase)
        k: Number of RNS moduli
        platform: DPU ranks to plan for
        strategy: Parallel, sequential or AUTO
        phases: Kernel phases, used to decide which roles are resident
        threading: Threading hint applied to the NTT kernels

    Returns:
        WorkPlan satisfying the assignment invariants

    Raises:
        PlanningError: If modulus-parallel needs more DPUs than available
    """
    if num_ciphertexts < 0:
        raise DomainError("ciphertext count cannot be negative")
    if k < 1:
        raise DomainError("need at least one modulus")
    strategy = resolve_strategy(strategy, k, platform)
    roles = roles_for(phases)
    usable = platform.usable_dpus
    assignment: list[list[WorkItem]] = [[] for _ in range(usable)]

    if strategy is Strategy.MODULUS_PARALLEL:
        if usable < k:
            raise PlanningError(
                f"{usable} DPU(s) cannot host {k} moduli in parallel; "
                f"use the modulus-sequential strategy"
            )
        group_sizes = _group_sizes(k, platform)
        dpu_modulus: list[int | None] = []
        start = 0
        for i, size in enumerate(group_sizes):
            dpu_modulus.extend([i] * size)
            for c in range(num_ciphertexts):
                dpu = start + c % size
                assignment[dpu].extend(WorkItem(c, i, role) for role in roles)
            start += size
    else:
        group_sizes = (usable,)
        dpu_modulus = [None] * usable
        for c in range(num_ciphertexts):
            dpu = c % usable
            for i in range(k):
                assignment[dpu].extend(WorkItem(c, i, role) for role in roles)

    plan = WorkPlan(
        strategy=strategy,
        num_ciphertexts=num_ciphertexts,
        k=k,
        assignment=assignment,
        group_sizes=group_sizes,
        dpu_modulus=tuple(dpu_modulus),
        roles=roles,
        threading={KernelKind.NTT: threading, KernelKind.INTT: threading},
    )
    if plan.imbalanced:
        logger.warning(f"Modulus groups are uneven: {list(group_sizes)}")
    logger.debug(
        f"Planned {num_ciphertexts} ciphertext(s), k={k} on {usable} DPUs "
        f"({strategy.value}, groups {list(group_sizes)})"
    )
    return plan
