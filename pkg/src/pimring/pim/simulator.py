"""Analytic cycle accounting for kernels, plans and host transfers.

Per DPU, a kernel's instruction work is divided by the number of threads
that overlap in the pipeline. MRAM traffic goes through a single DMA engine,
so transfers are serialized, but one thread's transfer runs while the other
threads compute. A kernel therefore costs max(compute + one item's DMA,
all items' DMA).
"""

from __future__ import annotations

import logging
import math
from collections import Counter
from collections.abc import Sequence
from dataclasses import dataclass, field

from ..errors import CapacityError, DomainError, PlanningError
from ..ring.modarith import is_power_of_two
from ..ring.ntt import NttPlan, Threading
from .model import (
    INTERFACE_HEADER_BYTES,
    RESIDUE_BYTES,
    CostTable,
    DpuModel,
    KernelKind,
    PlatformModel,
)
from .planner import Strategy, WorkPlan

logger = logging.getLogger(__name__)


def capacity(n: int, model: DpuModel) -> int:
    """
    Sub-polynomials of length n that fit in one DPU's usable MRAM.

    The header and both twiddle tables take about two sub-polynomials' worth.
    """
    if not is_power_of_two(n):
        raise DomainError(f"polynomial length {n} is not a power of two")
    sub_bytes = RESIDUE_BYTES * n
    return max(0, (model.usable_mram_bytes - 2 * sub_bytes) // sub_bytes)


def _dma_bytes_per_item(kind: KernelKind, n: int) -> int:
    sub = RESIDUE_BYTES * n
    if kind is KernelKind.BGV_MUL:
        return 7 * sub  # four operands in, three results out
    return 3 * sub  # data in and out plus one table or operand


def _work_per_item(kind: KernelKind, n: int, threading: Threading, cost: CostTable) -> int:
    if kind is KernelKind.POINTWISE_MUL:
        return n * cost.pointwise_mul_slot_cycles()
    if kind is KernelKind.POINTWISE_ADD:
        return n * cost.pointwise_add_slot_cycles()
    if kind is KernelKind.BGV_MUL:
        return n * cost.bgv_slot_cycles()
    plan = NttPlan.for_length(n, threading)
    work = plan.butterflies * cost.butterfly_cycles()
    if kind is KernelKind.INTT:
        work += n * cost.scale_slot_cycles()
    if plan.threading is Threading.FINE_GRAINED:
        work += plan.stages * cost.fine_grained_barrier
    return work


@dataclass(frozen=True)
class KernelCost:
    """
    Cycles of one kernel over all its items on one DPU.

    dma_cycles counts only the transfer time left exposed: the first item's
    load plus whatever the serialized transfers need beyond the compute time.
    """

    kind: KernelKind
    items: int
    compute_cycles: int
    dma_cycles: int

    @property
    def total_cycles(self) -> int:
        return self.compute_cycles + self.dma_cycles


def kernel_cost_breakdown(
    kind: KernelKind,
    n: int,
    items_on_dpu: int,
    threading: Threading,
    cost: CostTable,
    model: DpuModel,
) -> KernelCost:
    """
    Compute and DMA cycles of one kernel on one DPU.

    Args:
        kind: Kernel to cost
        n: Polynomial length
        items_on_dpu: Sub-polynomials (multiplication pairs for BGV_MUL) the DPU processes
        threading: Coarse (one item per thread) or fine (all threads per item)
        cost: Instruction-class cycle table
        model: DPU parameters

    Returns:
        KernelCost with compute = ceil(work / effective parallelism) and the
        DMA cycles that compute does not hide
    """
    if not is_power_of_two(n):
        raise DomainError(f"polynomial length {n} is not a power of two")
    if items_on_dpu < 0:
        raise DomainError("item count cannot be negative")
    if items_on_dpu == 0:
        return KernelCost(kind=kind, items=0, compute_cycles=0, dma_cycles=0)

    if threading is Threading.COARSE_GRAINED:
        active = min(items_on_dpu, model.hw_threads)
    else:
        active = model.hw_threads
    parallelism = model.effective_parallelism(active)
    work = items_on_dpu * _work_per_item(kind, n, threading, cost)
    compute = math.ceil(work / parallelism)
    item_dma = cost.dma_cycles(_dma_bytes_per_item(kind, n))
    if kind is KernelKind.INTT and cost.logical_twiddle_penalty != 1.0:
        compute = math.ceil(compute * cost.logical_twiddle_penalty)
        item_dma = math.ceil(item_dma * cost.logical_twiddle_penalty)
    # the first load is exposed; the rest queue behind it under other threads' compute
    dma = max(item_dma, items_on_dpu * item_dma - compute)
    return KernelCost(kind=kind, items=items_on_dpu, compute_cycles=compute, dma_cycles=dma)


def kernel_cost(
    kind: KernelKind,
    n: int,
    items_on_dpu: int,
    threading: Threading,
    cost: CostTable,
    model: DpuModel,
) -> int:
    """Total cycles (compute plus serialized DMA) of one kernel on one DPU."""
    return kernel_cost_breakdown(kind, n, items_on_dpu, threading, cost, model).total_cycles


@dataclass(frozen=True)
class SimReport:
    """
    Outcome of simulating one plan.

    Attributes:
        per_dpu_cycles: Total cycles per DPU
        makespan_cycles: Slowest DPU
        phase_cycles: Per-phase cycles on the slowest DPU
        compute_seconds: makespan_cycles / clock
        transfer_seconds: Host to DPU upload time
        retrieval_seconds: DPU to host download time
    """

    strategy: Strategy
    n: int
    k: int
    num_ciphertexts: int
    num_dpus: int
    phases: tuple[KernelKind, ...]
    per_dpu_cycles: tuple[int, ...]
    makespan_cycles: int
    phase_cycles: dict[str, int]
    compute_seconds: float
    transfer_seconds: float
    retrieval_seconds: float
    group_sizes: tuple[int, ...] = ()
    cost_preset: str = "default"
    butterfly_overhead: int = 0
    bytes_uploaded: int = 0
    bytes_retrieved: int = 0
    extra: dict[str, float] = field(default_factory=dict)

    def __post_init__(self) -> None:
        expected = max(self.per_dpu_cycles, default=0)
        if self.makespan_cycles != expected:
            raise DomainError(f"makespan {self.makespan_cycles} != slowest DPU {expected}")

    @property
    def imbalance(self) -> bool:
        return len(set(self.group_sizes)) > 1

    @property
    def total_seconds(self) -> float:
        return self.compute_seconds + self.transfer_seconds + self.retrieval_seconds

    @property
    def transfer_overhead_pct(self) -> float:
        """Upload time as a percentage of compute time."""
        if not self.compute_seconds:
            return 0.0
        return 100.0 * self.transfer_seconds / self.compute_seconds

    @property
    def retrieval_overhead_pct(self) -> float:
        if not self.compute_seconds:
            return 0.0
        return 100.0 * self.retrieval_seconds / self.compute_seconds

    def to_row(self) -> dict[str, object]:
        """Flat mapping of the report for CSV output."""
        return {
            "strategy": self.strategy.value,
            "imbalanced": int(self.imbalance),
            "makespan_cycles": self.makespan_cycles,
            "compute_seconds": f"{self.compute_seconds:.9g}",
            "transfer_seconds": f"{self.transfer_seconds:.9g}",
            "retrieval_seconds": f"{self.retrieval_seconds:.9g}",
            "total_seconds": f"{self.total_seconds:.9g}",
            "transfer_pct": f"{self.transfer_overhead_pct:.4g}",
            "retrieval_pct": f"{self.retrieval_overhead_pct:.4g}",
            "butterfly_overhead": self.butterfly_overhead,
        }


def _link_seconds(num_bytes: int, rate: float, latency: float) -> float:
    return latency + num_bytes / rate if num_bytes else 0.0


def simulate(
    plan: WorkPlan,
    phases: Sequence[KernelKind],
    n: int,
    cost: CostTable,
    model: DpuModel,
    platform: PlatformModel,
) -> SimReport:
    """
    Accumulate kernel cycles per DPU over the plan's phases.

    Modulus-sequential plans pay a kernel launch and a twiddle reload for
    every modulus; modulus-parallel plans pay them once.

    Raises:
        PlanningError: If the plan does not fit the platform or the phases
            multiply without both operands resident
        CapacityError: If a DPU holds more sub-polynomials than its MRAM fits
    """
    if plan.num_dpus != platform.usable_dpus:
        raise PlanningError(f"plan covers {plan.num_dpus} DPUs, platform has {platform.usable_dpus}")
    phases = tuple(phases)
    limit = capacity(n, model)
    sub_bytes = RESIDUE_BYTES * n
    table_bytes = 2 * sub_bytes + INTERFACE_HEADER_BYTES
    sequential = plan.strategy is Strategy.MODULUS_SEQUENTIAL
    launches = plan.k if sequential else 1

    per_dpu: list[int] = []
    per_dpu_phases: list[dict[str, int]] = []
    final_live = len(plan.roles)
    for dpu, items in enumerate(plan.assignment):
        if len(items) > limit:
            raise CapacityError(
                f"DPU {dpu} holds {len(items)} sub-polynomials of length {n}; "
                f"capacity() allows {limit}"
            )
        ciphertexts = Counter(item.modulus for item in items if item.role is plan.roles[0])
        breakdown: dict[str, int] = {}
        total = 0
        for count in ciphertexts.values():
            live = len(plan.roles)
            for kind in phases:
                if kind is KernelKind.BGV_MUL:
                    if live != 4:
                        raise PlanningError("BGV multiplication needs both operands resident")
                    items_on_dpu = count
                else:
                    items_on_dpu = count * live
                cycles = kernel_cost(kind, n, items_on_dpu, plan.threading_for(kind), cost, model)
                breakdown[kind.value] = breakdown.get(kind.value, 0) + cycles
                total += cycles
                if kind is KernelKind.BGV_MUL:
                    live = 3
            final_live = live
        if items and phases:
            setup = launches * (cost.kernel_launch + cost.dma_cycles(table_bytes))
            breakdown["setup"] = setup
            total += setup
        per_dpu.append(total)
        per_dpu_phases.append(breakdown)

    makespan = max(per_dpu, default=0)
    critical = per_dpu.index(makespan) if per_dpu else 0
    busy_dpus = sum(1 for items in plan.assignment if items)
    configured = busy_dpus * (plan.k if sequential else 1)
    uploaded = plan.num_ciphertexts * plan.k * len(plan.roles) * sub_bytes
    if uploaded:
        uploaded += configured * table_bytes
    retrieved = plan.num_ciphertexts * plan.k * final_live * sub_bytes

    report = SimReport(
        strategy=plan.strategy,
        n=n,
        k=plan.k,
        num_ciphertexts=plan.num_ciphertexts,
        num_dpus=plan.num_dpus,
        phases=phases,
        per_dpu_cycles=tuple(per_dpu),
        makespan_cycles=makespan,
        phase_cycles=per_dpu_phases[critical] if per_dpu_phases else {},
        compute_seconds=makespan / model.clock_hz,
        transfer_seconds=_link_seconds(
            uploaded, platform.host_link_bytes_per_second, platform.link_latency_seconds
        ),
        retrieval_seconds=_link_seconds(
            retrieved, platform.retrieval_bytes_per_second, platform.link_latency_seconds
        ),
        group_sizes=plan.group_sizes,
        cost_preset=cost.name,
        butterfly_overhead=cost.butterfly_overhead,
        bytes_uploaded=uploaded,
        bytes_retrieved=retrieved,
    )
    logger.debug(
        f"Simulated {plan.num_ciphertexts} ciphertext(s) on {plan.num_dpus} DPUs: "
        f"makespan {makespan} cycles, phases {report.phase_cycles}"
    )
    return report
