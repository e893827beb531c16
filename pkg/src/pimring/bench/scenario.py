"""Benchmark scenarios: one simulated run described by its parameters."""

from __future__ import annotations

import dataclasses
import logging
from dataclasses import dataclass

from ..errors import DomainError
from ..pim.model import (
    COST_PRESETS,
    PLATFORM_PRESETS,
    KernelKind,
    PimConfig,
    cost_preset,
    load_pim_config,
    platform_preset,
)
from ..pim.planner import Strategy, plan_work
from ..pim.simulator import SimReport, simulate
from ..ring.modarith import is_power_of_two
from ..ring.ntt import Threading
from ..ring.rns import STANDARD_LENGTHS, build_base, default_coefficient_bits

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Scenario:
    """
    Parameters of one simulated run.

    Attributes:
        n: Polynomial length
        bits: Coefficient modulus width (None picks the default for n)
        num_ciphertexts: Ciphertexts, or multiplication pairs when BGV_MUL is a phase
        phases: Kernels run in order
        config_path: Optional key=value model config
        preset: Cost preset name
        platform: Platform preset name (host link model)
        strategy: Modulus strategy
        dpus: Usable DPU count, overriding the config's platform
        threading: Threading hint for the NTT kernels
    """

    n: int = 2048
    bits: int | None = None
    num_ciphertexts: int = 1
    phases: tuple[KernelKind, ...] = (KernelKind.NTT,)
    config_path: str | None = None
    preset: str = "default"
    platform: str = "upmem"
    strategy: Strategy = Strategy.AUTO
    dpus: int | None = None
    threading: Threading = Threading.COARSE_GRAINED

    def __post_init__(self) -> None:
        if not is_power_of_two(self.n):
            raise DomainError(f"polynomial length {self.n} is not a power of two")
        cost_preset(self.preset)
        platform_preset(self.platform)
        if self.num_ciphertexts < 0:
            raise DomainError("ciphertext count cannot be negative")
        if self.dpus is not None and self.dpus <= 0:
            raise DomainError("DPU count must be positive")
        object.__setattr__(self, "phases", tuple(self.phases))

    @property
    def standard(self) -> bool:
        return self.n in STANDARD_LENGTHS

    @property
    def coefficient_bits(self) -> int:
        return self.bits if self.bits is not None else default_coefficient_bits(self.n)

    def replace(self, **changes: object) -> Scenario:
        return dataclasses.replace(self, **changes)  # type: ignore[arg-type]

    def load_config(self) -> PimConfig:
        config = load_pim_config(self.config_path, self.preset, self.platform)
        if self.dpus is not None:
            config = dataclasses.replace(config, platform=config.platform.resized(self.dpus))
        return config


PRESET_NAMES = tuple(COST_PRESETS)
PLATFORM_NAMES = tuple(PLATFORM_PRESETS)


def run_scenario(scenario: Scenario) -> SimReport:
    """
    Build the RNS base, plan and simulate one scenario.

    Raises:
        PlanningError, CapacityError, PrimeExhaustionError: For infeasible points
    """
    if not scenario.standard:
        logger.warning(f"n={scenario.n} is not one of the standard lengths {STANDARD_LENGTHS}")
    config = scenario.load_config()
    base = build_base(scenario.n, scenario.coefficient_bits)
    plan = plan_work(
        scenario.num_ciphertexts,
        base.k,
        config.platform,
        scenario.strategy,
        phases=scenario.phases,
        threading=scenario.threading,
    )
    return simulate(plan, scenario.phases, scenario.n, config.cost, config.dpu, config.platform)
