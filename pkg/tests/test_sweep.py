"""Tests for scenarios and parameter sweeps."""

import io

import pytest

from pimring.bench.scenario import Scenario, run_scenario
from pimring.bench.sweep import (
    CSV_COLUMNS,
    DEFAULT_POINTS,
    SweepAxis,
    evaluate_point,
    result_row,
    run_sweep,
    write_csv,
    write_svg,
)
from pimring.errors import ConfigError, DomainError, PimRingError
from pimring.pim.model import KernelKind
from pimring.pim.planner import Strategy

GOLDEN_HEADER = (
    "schema_version,axis,n,bits,ciphertexts,dpus,k,phases,preset,platform,strategy,imbalanced,"
    "makespan_cycles,compute_seconds,transfer_seconds,retrieval_seconds,total_seconds,"
    "transfer_pct,retrieval_pct,butterfly_overhead,error"
)


@pytest.fixture
def template():
    return Scenario(n=1024, num_ciphertexts=4)


class TestScenario:
    """Tests for Scenario."""

    def test_defaults(self):
        """Test the default scenario is a standard length with default bits."""
        scenario = Scenario()
        assert scenario.standard
        assert scenario.coefficient_bits == 54

    def test_validation(self):
        """Test invalid lengths, presets, platforms and DPU counts."""
        with pytest.raises(DomainError):
            Scenario(n=1000)
        with pytest.raises(ConfigError):
            Scenario(preset="turbo")
        with pytest.raises(ConfigError):
            Scenario(platform="cxl")
        with pytest.raises(DomainError):
            Scenario(dpus=0)

    def test_dpus_override(self, template):
        """Test a DPU count resizes the configured platform."""
        assert template.replace(dpus=96).load_config().platform.usable_dpus == 96

    def test_run(self, template):
        """Test a single run reports on the default 509 DPUs."""
        report = run_scenario(template)
        assert report.num_dpus == 509
        assert report.k == 1
        assert report.makespan_cycles > 0

    def test_direct_platform(self, template):
        """Test direct host writes shrink transfers and leave compute alone."""
        copied = run_scenario(template)
        direct = run_scenario(template.replace(platform="direct"))
        assert direct.makespan_cycles == copied.makespan_cycles
        assert direct.compute_seconds == copied.compute_seconds
        assert direct.transfer_seconds < copied.transfer_seconds
        assert direct.retrieval_seconds < copied.retrieval_seconds

    def test_direct_platform_keeps_dpu_override(self, template):
        """Test resizing a direct platform keeps its link rates."""
        platform = template.replace(platform="direct", dpus=96).load_config().platform
        assert platform.usable_dpus == 96
        assert platform.link_latency_seconds == 0.0

    def test_non_standard_length_warns(self, caplog):
        """Test small lengths still run, with a warning."""
        report = run_scenario(Scenario(n=64))
        assert report.n == 64
        assert "not one of the standard lengths" in caplog.text

    def test_config_file(self, tmp_path):
        """Test a config file feeds the model."""
        path = tmp_path / "pim.cfg"
        path.write_text("cost.butterfly_overhead=0\n", encoding="utf-8")
        report = run_scenario(Scenario(n=1024, config_path=str(path)))
        assert report.butterfly_overhead == 0


class TestSweepAxis:
    """Tests for sweep axes."""

    def test_from_name(self):
        """Test axis names parse case-insensitively."""
        assert SweepAxis.from_name("DPUS") is SweepAxis.DPUS
        with pytest.raises(PimRingError):
            SweepAxis.from_name("bits")

    def test_apply_n_resets_bits(self):
        """Test sweeping n drops an explicit coefficient size."""
        scenario = SweepAxis.N.apply(Scenario(n=1024, bits=40), 2048)
        assert scenario.bits is None
        assert scenario.coefficient_bits == 54

    def test_default_ciphertext_points(self):
        """Test the default ciphertext sweep covers 1 to 4096."""
        assert DEFAULT_POINTS[SweepAxis.CIPHERTEXTS][0] == 1
        assert DEFAULT_POINTS[SweepAxis.CIPHERTEXTS][-1] == 4096


class TestRunSweep:
    """Tests for concurrent sweeps."""

    @pytest.mark.asyncio
    async def test_results_follow_input_order(self, template):
        """Test results come back in the order the values were given."""
        results = await run_sweep(template, SweepAxis.CIPHERTEXTS, [64, 1, 16])
        assert [r.value for r in results] == [64, 1, 16]
        assert all(r.ok for r in results)

    @pytest.mark.asyncio
    async def test_invalid_point_recorded(self, template):
        """Test a non-power-of-two length becomes an error row."""
        results = await run_sweep(template, SweepAxis.N, [1024, 1000])
        assert results[0].ok
        assert not results[1].ok
        row = result_row(results[1])
        assert row["n"] == 1000
        assert "power of two" in row["error"]

    @pytest.mark.asyncio
    async def test_infeasible_point_recorded(self):
        """Test a plan with too few DPUs is reported, not raised."""
        template = Scenario(n=4096, strategy=Strategy.MODULUS_PARALLEL)
        results = await run_sweep(template, SweepAxis.DPUS, [2, 64])
        assert "modulus-sequential" in results[0].error
        assert results[1].ok

    @pytest.mark.asyncio
    async def test_auto_strategy_per_dpu_count(self):
        """Test AUTO resolves per point for a three-modulus base."""
        template = Scenario(n=2048, bits=90)
        results = await run_sweep(template, SweepAxis.DPUS, [128, 192, 256, 383, 509])
        assert [r.report.strategy for r in results] == [
            Strategy.MODULUS_SEQUENTIAL,
            Strategy.MODULUS_PARALLEL,
            Strategy.MODULUS_SEQUENTIAL,
            Strategy.MODULUS_PARALLEL,
            Strategy.MODULUS_SEQUENTIAL,
        ]

    def test_evaluate_point_directly(self, template):
        """Test the synchronous evaluator used by the sweep."""
        result = evaluate_point(SweepAxis.CIPHERTEXTS, 4, template)
        assert result.ok
        assert result.error is None


class TestCsv:
    """Tests for CSV and SVG output."""

    @pytest.mark.asyncio
    async def test_header_and_rows(self, template):
        """Test the header is stable and every row has every column."""
        results = await run_sweep(template, SweepAxis.CIPHERTEXTS, [1, 2])
        out = io.StringIO()
        write_csv(results, out)
        lines = out.getvalue().splitlines()
        assert lines[0] == GOLDEN_HEADER
        assert len(lines) == 3
        assert all(len(line.split(",")) == len(CSV_COLUMNS) for line in lines[1:])
        assert lines[1].startswith("2,ciphertexts,1024,27,1,509,1,ntt,default,upmem,parallel,0,")

    @pytest.mark.asyncio
    async def test_deterministic(self, template, tmp_path):
        """Test two sweeps write identical files."""
        texts = []
        for name in ("a.csv", "b.csv"):
            results = await run_sweep(template, SweepAxis.N, [1024, 2048])
            write_csv(results, tmp_path / name)
            texts.append((tmp_path / name).read_text(encoding="utf-8"))
        assert texts[0] == texts[1]

    def test_phases_column(self):
        """Test multi-phase scenarios are joined with '+'."""
        scenario = Scenario(n=1024, phases=(KernelKind.NTT, KernelKind.BGV_MUL, KernelKind.INTT))
        row = result_row(evaluate_point(SweepAxis.CIPHERTEXTS, 1, scenario))
        assert row["phases"] == "ntt+bgv+intt"

    def test_platform_column(self):
        """Test the platform preset is recorded per row."""
        scenario = Scenario(n=1024, platform="direct")
        row = result_row(evaluate_point(SweepAxis.CIPHERTEXTS, 1, scenario))
        assert row["platform"] == "direct"
        assert row["schema_version"] == 2

    @pytest.mark.asyncio
    async def test_svg(self, template, tmp_path):
        """Test the chart is written when matplotlib is available."""
        pytest.importorskip("matplotlib")
        results = await run_sweep(template, SweepAxis.CIPHERTEXTS, [1, 2, 4])
        path = tmp_path / "sweep.svg"
        assert write_svg(results, path)
        assert path.read_text(encoding="utf-8").lstrip().startswith("<?xml")
