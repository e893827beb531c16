"""Cost model and interface image for running ring kernels on UPMEM DPUs."""

from .interface import (
    Command,
    InterfaceHeader,
    InterfaceImage,
    Opcode,
    build_image,
    decode_image,
    encode_image,
    execute_image,
    image_for_ciphertexts,
    product_from_images,
)
from .model import (
    COST_PRESETS,
    PLATFORM_PRESETS,
    CostTable,
    DpuModel,
    KernelKind,
    MulMode,
    PimConfig,
    PlatformModel,
    cost_preset,
    load_pim_config,
    pim_config_from_values,
    platform_preset,
)
from .planner import Role, Strategy, WorkItem, WorkPlan, plan_work, resolve_strategy
from .simulator import KernelCost, SimReport, capacity, kernel_cost, kernel_cost_breakdown, simulate

__all__ = [
    # Model
    "DpuModel",
    "CostTable",
    "PlatformModel",
    "PimConfig",
    "KernelKind",
    "MulMode",
    "COST_PRESETS",
    "cost_preset",
    "PLATFORM_PRESETS",
    "platform_preset",
    "load_pim_config",
    "pim_config_from_values",
    # Planning
    "Strategy",
    "Role",
    "WorkItem",
    "WorkPlan",
    "plan_work",
    "resolve_strategy",
    # Simulation
    "KernelCost",
    "SimReport",
    "capacity",
    "kernel_cost",
    "kernel_cost_breakdown",
    "simulate",
    # Interface image
    "Opcode",
    "Command",
    "InterfaceHeader",
    "InterfaceImage",
    "build_image",
    "encode_image",
    "decode_image",
    "execute_image",
    "image_for_ciphertexts",
    "product_from_images",
]
