"""Platform parameters and instruction-class cycle costs for the DPU cost model.

Three frozen dataclasses describe the machine:

- ``DpuModel``: one DPU (memories, hardware threads, pipeline, clock)
- ``CostTable``: cycles per instruction class plus DMA costs
- ``PlatformModel``: ranks of DPUs and the host link

All three load from key=value text (``dpu.``, ``cost.`` and ``platform.``
prefixes) on top of a named cost preset and a named platform preset.
"""

from __future__ import annotations

import dataclasses
import logging
import math
from dataclasses import dataclass
from enum import Enum
from pathlib import Path

from ..config import apply_overrides, check_known_keys, load_config
from ..errors import ConfigError, DomainError

logger = logging.getLogger(__name__)

MIB = 1 << 20
KIB = 1 << 10
RESIDUE_BYTES = 4
INTERFACE_HEADER_BYTES = 80

# Instruction counts of the non-multiply parts of the kernels, in ALU ops.
BARRETT_ALU_OPS = 6  # shift, subtract, two conditional subtractions
MODADD_ALU_OPS = 3  # add, compare, conditional subtract
MODSUB_ALU_OPS = 3
BUTTERFLY_LOAD_STORES = 5  # two operands in and out, one twiddle
POINTWISE_LOAD_STORES = 3  # two operands in, one out
SCALE_LOAD_STORES = 2
BGV_LOAD_STORES = 7  # four operands in, three out


class KernelKind(Enum):
    """Kernels a DPU can run on its sub-polynomials."""

    NTT = "ntt"
    INTT = "intt"
    POINTWISE_MUL = "pmul"
    POINTWISE_ADD = "padd"
    BGV_MUL = "bgv"

    @classmethod
    def from_name(cls, name: str) -> KernelKind:
        key = name.strip().lower().replace("-", "_")
        for member in cls:
            if key in (member.value, member.name.lower()):
                return member
        raise DomainError(f"unknown kernel {name!r}")

    @classmethod
    def parse_phases(cls, text: str) -> list[KernelKind]:
        """Parse a comma-separated phase list such as ``ntt,bgv,intt``."""
        return [cls.from_name(part) for part in text.split(",") if part.strip()]


class MulMode(Enum):
    """Which multiplication routines the kernels are costed with."""

    CUSTOM = "custom"
    DUMMY = "dummy"
    OPTIMISTIC = "optimistic"
    NATIVE = "native"


@dataclass(frozen=True)
class DpuModel:
    """Parameters of a single DPU."""

    mram_bytes: int = 64 * MIB
    reserved_bytes: int = 4 * MIB
    wram_bytes: int = 64 * KIB
    hw_threads: int = 16
    pipeline_saturation_threads: int = 11
    pipeline_stages: int = 14
    clock_hz: int = 400_000_000

    def __post_init__(self) -> None:
        for f in dataclasses.fields(self):
            if getattr(self, f.name) <= 0:
                raise DomainError(f"dpu.{f.name} must be positive")
        if self.reserved_bytes >= self.mram_bytes:
            raise DomainError("reserved MRAM must be smaller than the MRAM slice")
        if self.pipeline_saturation_threads > self.hw_threads:
            raise DomainError("pipeline saturation cannot exceed the hardware thread count")

    @property
    def usable_mram_bytes(self) -> int:
        return self.mram_bytes - self.reserved_bytes

    def effective_parallelism(self, active_threads: int) -> int:
        """Threads that actually overlap in the pipeline."""
        return max(1, min(active_threads, self.hw_threads, self.pipeline_saturation_threads))


_MAY_BE_ZERO = frozenset({"call_overhead", "butterfly_overhead", "fine_grained_barrier", "kernel_launch"})


@dataclass(frozen=True)
class CostTable:
    """
    Cycles per instruction class.

    The ``mul_mode`` field selects which multiply entries the kernels use;
    the other entries stay available for what-if comparisons.
    """

    name: str = "default"
    mul_mode: str = MulMode.CUSTOM.value
    add_sub_logic: int = 1
    load_store: int = 1
    mul8: int = 1
    mul32_native_worst: int = 43
    mul64_native: int = 60
    mul32x32_to_64_custom: int = 35
    mul32x32_to_32_custom: int = 21
    dummy_mul32: int = 2
    dummy_mul64: int = 4
    optimistic_mul: int = 1
    call_overhead: int = 5
    butterfly_overhead: int = 4
    fine_grained_barrier: int = 20
    kernel_launch: int = 2000
    dma_setup_cycles: int = 77
    dma_bytes_per_cycle: float = 2.0
    dma_max_transfer_bytes: int = 2048
    logical_twiddle_penalty: float = 1.0

    def __post_init__(self) -> None:
        try:
            MulMode(self.mul_mode)
        except ValueError as e:
            raise DomainError(f"unknown multiplication mode {self.mul_mode!r}") from e
        for f in dataclasses.fields(self):
            value = getattr(self, f.name)
            if isinstance(value, str):
                continue
            if value < 0 or (value == 0 and f.name not in _MAY_BE_ZERO):
                raise DomainError(f"cost.{f.name} must be positive")
        if self.logical_twiddle_penalty < 1.0:
            raise DomainError("logical_twiddle_penalty is a slowdown factor (>= 1)")

    @property
    def mode(self) -> MulMode:
        return MulMode(self.mul_mode)

    @property
    def mul64(self) -> int:
        """Cycles of one 32x32 -> 64-bit product."""
        return {
            MulMode.CUSTOM: self.mul32x32_to_64_custom,
            MulMode.DUMMY: self.dummy_mul64,
            MulMode.OPTIMISTIC: self.optimistic_mul,
            MulMode.NATIVE: self.mul64_native,
        }[self.mode]

    @property
    def mul32(self) -> int:
        """Cycles of one 32x32 -> 32-bit product."""
        return {
            MulMode.CUSTOM: self.mul32x32_to_32_custom,
            MulMode.DUMMY: self.dummy_mul32,
            MulMode.OPTIMISTIC: self.optimistic_mul,
            MulMode.NATIVE: self.mul32_native_worst,
        }[self.mode]

    @property
    def call(self) -> int:
        # A single-cycle multiply would be inlined.
        return 0 if self.mode is MulMode.OPTIMISTIC else self.call_overhead

    def modmul_cycles(self) -> int:
        """Wide product, Barrett high product and q*p low product, plus Barrett ALU work."""
        return 2 * self.mul64 + self.mul32 + 3 * self.call + BARRETT_ALU_OPS * self.add_sub_logic

    def modadd_cycles(self) -> int:
        return MODADD_ALU_OPS * self.add_sub_logic

    def modsub_cycles(self) -> int:
        return MODSUB_ALU_OPS * self.add_sub_logic

    def butterfly_cycles(self) -> int:
        return (
            self.modmul_cycles()
            + self.modadd_cycles()
            + self.modsub_cycles()
            + BUTTERFLY_LOAD_STORES * self.load_store
            + self.butterfly_overhead
        )

    def pointwise_mul_slot_cycles(self) -> int:
        return self.modmul_cycles() + POINTWISE_LOAD_STORES * self.load_store

    def pointwise_add_slot_cycles(self) -> int:
        return self.modadd_cycles() + POINTWISE_LOAD_STORES * self.load_store

    def scale_slot_cycles(self) -> int:
        return self.modmul_cycles() + SCALE_LOAD_STORES * self.load_store

    def bgv_slot_cycles(self) -> int:
        return 4 * self.modmul_cycles() + self.modadd_cycles() + BGV_LOAD_STORES * self.load_store

    def dma_cycles(self, num_bytes: int) -> int:
        """Cycles to stream num_bytes between MRAM and WRAM in maximal chunks."""
        if num_bytes <= 0:
            return 0
        transfers = math.ceil(num_bytes / self.dma_max_transfer_bytes)
        return transfers * self.dma_setup_cycles + math.ceil(num_bytes / self.dma_bytes_per_cycle)

    @classmethod
    def uniform(cls, cycles: int = 1, name: str = "uniform") -> CostTable:
        """Every instruction class at the same cost; handy for hand-countable checks."""
        values: dict[str, object] = {}
        for f in dataclasses.fields(cls):
            if f.name in ("name", "mul_mode", "logical_twiddle_penalty", "dma_max_transfer_bytes"):
                continue
            values[f.name] = float(cycles) if f.name == "dma_bytes_per_cycle" else cycles
        return cls(name=name, **values)  # type: ignore[arg-type]


COST_PRESETS: dict[str, CostTable] = {
    "default": CostTable(),
    "dummy": CostTable(name="dummy", mul_mode=MulMode.DUMMY.value),
    "optimistic": CostTable(name="optimistic", mul_mode=MulMode.OPTIMISTIC.value),
    # 64-bit multiply read as 134x an 8-bit multiply.
    "native134": CostTable(name="native134", mul_mode=MulMode.NATIVE.value, mul64_native=134),
}


def cost_preset(name: str) -> CostTable:
    """Look up a cost preset by name."""
    try:
        return COST_PRESETS[name]
    except KeyError as e:
        known = ", ".join(COST_PRESETS)
        raise ConfigError(f"unknown cost preset {name!r} (known: {known})") from e


@dataclass(frozen=True)
class PlatformModel:
    """
    A set of DPU ranks plus the host link.

    Defective DPUs are taken one at a time from the last ranks backwards.
    """

    dpus_per_rank: int = 64
    ranks: int = 8
    defective_dpus: int = 3
    host_link_bytes_per_second: float = 6.68e9
    retrieval_bytes_per_second: float = 4.74e9
    link_latency_seconds: float = 2e-4

    def __post_init__(self) -> None:
        if self.dpus_per_rank <= 0 or self.ranks <= 0:
            raise DomainError("platform needs at least one rank of DPUs")
        if not 0 <= self.defective_dpus < self.ranks * self.dpus_per_rank:
            raise DomainError("defective DPU count must leave at least one usable DPU")
        if self.host_link_bytes_per_second <= 0 or self.retrieval_bytes_per_second <= 0:
            raise DomainError("link rates must be positive")
        if self.link_latency_seconds < 0:
            raise DomainError("link latency cannot be negative")

    @classmethod
    def with_dpus(cls, dpus: int, dpus_per_rank: int = 64, **kwargs: float) -> PlatformModel:
        """Smallest whole-rank platform with exactly ``dpus`` usable DPUs."""
        if dpus <= 0:
            raise DomainError("need at least one DPU")
        ranks = math.ceil(dpus / dpus_per_rank)
        return cls(
            dpus_per_rank=dpus_per_rank,
            ranks=ranks,
            defective_dpus=ranks * dpus_per_rank - dpus,
            **kwargs,  # type: ignore[arg-type]
        )

    def resized(self, dpus: int) -> PlatformModel:
        """Same link parameters, different DPU count."""
        return PlatformModel.with_dpus(
            dpus,
            dpus_per_rank=self.dpus_per_rank,
            host_link_bytes_per_second=self.host_link_bytes_per_second,
            retrieval_bytes_per_second=self.retrieval_bytes_per_second,
            link_latency_seconds=self.link_latency_seconds,
        )

    @property
    def total_dpus(self) -> int:
        return self.ranks * self.dpus_per_rank

    @property
    def usable_dpus(self) -> int:
        return self.total_dpus - self.defective_dpus

    def rank_sizes(self) -> list[int]:
        """Usable DPUs per rank."""
        sizes = [self.dpus_per_rank] * self.ranks
        for i in range(self.defective_dpus):
            sizes[self.ranks - 1 - (i % self.ranks)] -= 1
        return sizes

    @property
    def usable_ranks(self) -> int:
        return sum(1 for size in self.rank_sizes() if size > 0)


# Host link presets. "direct" models a host that writes operands into DPU
# memory already transposed and reads results back in place, so both
# directions run at one DDR4-2400 channel's rate with no runtime call.
DIRECT_WRITE_BYTES_PER_SECOND = 2400e6 * 8

PLATFORM_PRESETS: dict[str, PlatformModel] = {
    "upmem": PlatformModel(),
    "direct": PlatformModel(
        host_link_bytes_per_second=DIRECT_WRITE_BYTES_PER_SECOND,
        retrieval_bytes_per_second=DIRECT_WRITE_BYTES_PER_SECOND,
        link_latency_seconds=0.0,
    ),
}


def platform_preset(name: str) -> PlatformModel:
    """Look up a platform preset by name."""
    try:
        return PLATFORM_PRESETS[name]
    except KeyError as e:
        known = ", ".join(PLATFORM_PRESETS)
        raise ConfigError(f"unknown platform preset {name!r} (known: {known})") from e


@dataclass(frozen=True)
class PimConfig:
    """DPU, cost table and platform used together for one run."""

    dpu: DpuModel = dataclasses.field(default_factory=DpuModel)
    cost: CostTable = dataclasses.field(default_factory=CostTable)
    platform: PlatformModel = dataclasses.field(default_factory=PlatformModel)


def pim_config_from_values(
    values: dict[str, str], preset: str = "default", platform: str = "upmem"
) -> PimConfig:
    """
    Build a PimConfig from parsed key=value pairs on top of a cost and a platform preset.

    Raises:
        ConfigError: On unknown keys, unparsable values or invalid models
    """
    defaults = PimConfig(cost=cost_preset(preset), platform=platform_preset(platform))
    sections: dict[str, object] = {
        "dpu": defaults.dpu,
        "cost": defaults.cost,
        "platform": defaults.platform,
    }
    check_known_keys(values, sections)
    try:
        return PimConfig(
            dpu=apply_overrides(defaults.dpu, values, "dpu"),
            cost=apply_overrides(defaults.cost, values, "cost"),
            platform=apply_overrides(defaults.platform, values, "platform"),
        )
    except DomainError as e:
        raise ConfigError(str(e)) from e


def load_pim_config(
    path: str | Path | None = None, preset: str = "default", platform: str = "upmem"
) -> PimConfig:
    """Load a key=value model config file; no path means preset defaults."""
    if path is None:
        return PimConfig(cost=cost_preset(preset), platform=platform_preset(platform))
    config = pim_config_from_values(load_config(path), preset, platform)
    logger.info(f"Loaded PIM model config from {path} (presets {preset}, {platform})")
    return config
