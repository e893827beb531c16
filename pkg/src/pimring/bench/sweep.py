"""Parameter sweeps over simulated scenarios, written as CSV and optional SVG."""

from __future__ import annotations

import asyncio
import csv
import logging
from collections.abc import Sequence
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import IO

from ..errors import PimRingError
from ..pim.simulator import SimReport
from .scenario import Scenario, run_scenario

logger = logging.getLogger(__name__)

SCHEMA_VERSION = 2

CSV_COLUMNS = (
    "schema_version",
    "axis",
    "n",
    "bits",
    "ciphertexts",
    "dpus",
    "k",
    "phases",
    "preset",
    "platform",
    "strategy",
    "imbalanced",
    "makespan_cycles",
    "compute_seconds",
    "transfer_seconds",
    "retrieval_seconds",
    "total_seconds",
    "transfer_pct",
    "retrieval_pct",
    "butterfly_overhead",
    "error",
)


class SweepAxis(Enum):
    """Scenario field a sweep varies."""

    CIPHERTEXTS = "ciphertexts"
    DPUS = "dpus"
    N = "n"

    @classmethod
    def from_name(cls, name: str) -> SweepAxis:
        try:
            return cls(name.strip().lower())
        except ValueError as e:
            raise PimRingError(f"unknown sweep axis {name!r}") from e

    def apply(self, template: Scenario, value: int) -> Scenario:
        if self is SweepAxis.CIPHERTEXTS:
            return template.replace(num_ciphertexts=value)
        if self is SweepAxis.DPUS:
            return template.replace(dpus=value)
        return template.replace(n=value, bits=None)


DEFAULT_POINTS: dict[SweepAxis, tuple[int, ...]] = {
    SweepAxis.CIPHERTEXTS: tuple(2**i for i in range(13)),
    SweepAxis.DPUS: (128, 192, 256, 383, 509),
    SweepAxis.N: (1024, 2048, 4096, 8192),
}


@dataclass(frozen=True)
class SweepResult:
    """One evaluated sweep point; exactly one of report and error is set."""

    axis: SweepAxis
    value: int
    scenario: Scenario
    report: SimReport | None = None
    error: str | None = None

    @property
    def ok(self) -> bool:
        return self.report is not None


def evaluate_point(axis: SweepAxis, value: int, scenario: Scenario) -> SweepResult:
    """Run one point, turning an infeasible point into an error result."""
    try:
        report = run_scenario(scenario)
    except PimRingError as e:
        logger.warning(f"Sweep point {axis.value}={value} is infeasible: {e}")
        return SweepResult(axis=axis, value=value, scenario=scenario, error=str(e))
    logger.info(f"Sweep point {axis.value}={value}: {report.makespan_cycles} cycles")
    return SweepResult(axis=axis, value=value, scenario=scenario, report=report)


async def run_sweep(
    template: Scenario,
    axis: SweepAxis,
    values: Sequence[int] | None = None,
) -> list[SweepResult]:
    """
    Evaluate every sweep point concurrently.

    Args:
        template: Scenario providing every field but the swept one
        axis: Field to vary
        values: Points to evaluate (defaults per axis)

    Returns:
        Results ordered by the given values, regardless of completion order
    """
    points = list(values) if values is not None else list(DEFAULT_POINTS[axis])
    scenarios = []
    results: list[SweepResult | None] = [None] * len(points)
    for i, value in enumerate(points):
        try:
            scenarios.append(axis.apply(template, value))
        except PimRingError as e:
            logger.warning(f"Sweep point {axis.value}={value} is invalid: {e}")
            results[i] = SweepResult(axis=axis, value=value, scenario=template, error=str(e))
            scenarios.append(None)

    pending = [
        (i, asyncio.to_thread(evaluate_point, axis, points[i], scenario))
        for i, scenario in enumerate(scenarios)
        if scenario is not None
    ]
    evaluated = await asyncio.gather(*(task for _, task in pending))
    for (i, _), result in zip(pending, evaluated, strict=True):
        results[i] = result
    return [r for r in results if r is not None]


def _bits(scenario: Scenario) -> object:
    try:
        return scenario.coefficient_bits
    except PimRingError:
        return ""


def result_row(result: SweepResult) -> dict[str, object]:
    """One CSV row in CSV_COLUMNS order."""
    s = result.scenario
    row: dict[str, object] = dict.fromkeys(CSV_COLUMNS, "")
    row.update(
        schema_version=SCHEMA_VERSION,
        axis=result.axis.value,
        n=s.n,
        bits=_bits(s),
        ciphertexts=s.num_ciphertexts,
        dpus=s.dpus if s.dpus is not None else "",
        phases="+".join(kind.value for kind in s.phases),
        preset=s.preset,
        platform=s.platform,
        strategy=s.strategy.value,
    )
    row[result.axis.value] = result.value
    if result.report is not None:
        report = result.report
        row.update(report.to_row())
        row.update(k=report.k, dpus=report.num_dpus)
    else:
        row["error"] = result.error or ""
    return row


def write_csv(results: Sequence[SweepResult], out: str | Path | IO[str]) -> None:
    """Write results as CSV with a header row."""
    if isinstance(out, (str, Path)):
        with open(out, "w", newline="", encoding="utf-8") as handle:
            write_csv(results, handle)
        logger.info(f"Wrote {len(results)} sweep row(s) to {out}")
        return
    writer = csv.DictWriter(out, fieldnames=CSV_COLUMNS, lineterminator="\n")
    writer.writeheader()
    for result in results:
        writer.writerow(result_row(result))


def write_svg(results: Sequence[SweepResult], path: str | Path) -> bool:
    """
    Plot compute, transfer and retrieval seconds against the swept value.

    Returns:
        False if matplotlib is not installed (the CSV is the primary output)
    """
    try:
        import matplotlib

        matplotlib.use("Agg")
        import matplotlib.pyplot as plt
    except ImportError:
        logger.warning("matplotlib is not installed; skipping the SVG chart")
        return False

    feasible = [r for r in results if r.report is not None]
    if not feasible:
        logger.warning("No feasible sweep points to plot")
        return False
    axis = feasible[0].axis
    xs = [r.value for r in feasible]
    fig, ax = plt.subplots(figsize=(7, 4))
    ax.plot(xs, [r.report.compute_seconds for r in feasible], marker="o", label="compute")
    ax.plot(xs, [r.report.transfer_seconds for r in feasible], marker="s", label="transfer")
    ax.plot(xs, [r.report.retrieval_seconds for r in feasible], marker="^", label="retrieval")
    sequential = [r for r in feasible if r.report.strategy.value == "sequential"]
    if sequential:
        ax.scatter(
            [r.value for r in sequential],
            [r.report.compute_seconds for r in sequential],
            s=80,
            facecolors="none",
            edgecolors="black",
            label="modulus-sequential",
        )
    if axis is SweepAxis.CIPHERTEXTS:
        ax.set_xscale("log", base=2)
    ax.set_xlabel(axis.value)
    ax.set_ylabel("seconds (simulated)")
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, format="svg")
    plt.close(fig)
    logger.info(f"Wrote chart to {path}")
    return True
