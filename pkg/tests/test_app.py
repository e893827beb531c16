"""Tests for the pimring command-line interface."""

import csv

import pytest

from pimring.app import (
    EXIT_INFEASIBLE,
    EXIT_OK,
    EXIT_USAGE,
    EXIT_VERIFY_FAILED,
    build_parser,
    main,
)
from pimring.ring.rns import load_base_config


def test_import_app():
    """Test that the app module exposes its entry point."""
    from pimring import app

    assert hasattr(app, "main")
    assert hasattr(app, "build_parser")


class TestParser:
    """Tests for argument parsing."""

    def test_subcommand_required(self):
        """Test running without a subcommand is a usage error."""
        with pytest.raises(SystemExit) as exc_info:
            build_parser().parse_args([])
        assert exc_info.value.code == 2

    def test_non_power_of_two_length(self):
        """Test --n 1000 is rejected by argparse."""
        with pytest.raises(SystemExit) as exc_info:
            main(["params", "--n", "1000"])
        assert exc_info.value.code == EXIT_USAGE

    def test_phase_list(self):
        """Test --phases parses kernel names."""
        args = build_parser().parse_args(["sweep", "--phases", "ntt,bgv,intt"])
        assert [kind.value for kind in args.phases] == ["ntt", "bgv", "intt"]

    def test_bad_phase(self):
        """Test an unknown kernel in --phases."""
        with pytest.raises(SystemExit):
            build_parser().parse_args(["sweep", "--phases", "ntt,fft"])

    def test_verbose_and_quiet_exclusive(self):
        """Test -v and -q cannot be combined."""
        with pytest.raises(SystemExit):
            build_parser().parse_args(["-v", "-q", "params"])


class TestParams:
    """Tests for the params command."""

    def test_prints_base(self, capsys):
        """Test the base and its precomputed values are printed."""
        assert main(["params", "--n", "4096"]) == EXIT_OK
        out = capsys.readouterr().out
        assert "k=4" in out
        assert "barrett.3=" in out
        assert "psi.0=" in out

    def test_writes_output(self, tmp_path):
        """Test --output writes a readable base config."""
        path = tmp_path / "base.cfg"
        assert main(["params", "--n", "2048", "--output", str(path)]) == EXIT_OK
        base, n, bits = load_base_config(path)
        assert (base.k, n, bits) == (2, 2048, 54)

    def test_seed_accepted(self, capsys):
        """Test --seed parses and leaves the deterministic base unchanged."""
        assert main(["params", "--n", "1024"]) == EXIT_OK
        plain = capsys.readouterr().out
        assert main(["params", "--n", "1024", "--seed", "9"]) == EXIT_OK
        assert capsys.readouterr().out == plain

    def test_narrow_modulus(self):
        """Test a coefficient size below 17 bits is a usage error."""
        assert main(["params", "--n", "1024", "--bits", "10"]) == EXIT_USAGE


class TestVerify:
    """Tests for the verify command."""

    def test_passes(self, capsys):
        """Test every suite passes on correct tables."""
        assert main(["verify", "--n", "64", "--trials", "2"]) == EXIT_OK
        out = capsys.readouterr().out
        assert out.count("[PASS]") == 4

    def test_corrupted_twiddles(self, capsys):
        """Test a corrupted twiddle fails with a reproduction hint."""
        code = main(["verify", "--n", "64", "--trials", "2", "--seed", "3", "--corrupt-twiddles"])
        assert code == EXIT_VERIFY_FAILED
        assert "reproduce with --seed 3 --trials 1" in capsys.readouterr().out

    def test_negative_trials(self):
        """Test negative trial counts are usage errors."""
        assert main(["verify", "--n", "64", "--trials", "-1"]) == EXIT_USAGE


class TestSweep:
    """Tests for the sweep command."""

    def test_csv_to_stdout(self, capsys):
        """Test CSV goes to stdout by default."""
        assert main(["sweep", "--n", "1024", "--values", "1,2,4"]) == EXIT_OK
        lines = capsys.readouterr().out.splitlines()
        assert lines[0].startswith("schema_version,axis,n,")
        assert len(lines) == 4

    def test_csv_file(self, tmp_path):
        """Test --csv writes one row per point."""
        path = tmp_path / "sweep.csv"
        code = main(
            ["sweep", "--n", "2048", "--bits", "90", "--axis", "dpus", "--values", "192,256", "--csv", str(path)]
        )
        assert code == EXIT_OK
        with open(path, newline="", encoding="utf-8") as handle:
            rows = list(csv.DictReader(handle))
        assert [row["strategy"] for row in rows] == ["parallel", "sequential"]
        assert [row["k"] for row in rows] == ["3", "3"]

    def test_ranks(self, tmp_path):
        """Test --ranks sizes the platform in whole ranks."""
        path = tmp_path / "sweep.csv"
        assert main(["sweep", "--n", "1024", "--ranks", "2", "--values", "1", "--csv", str(path)]) == EXIT_OK
        with open(path, newline="", encoding="utf-8") as handle:
            assert next(csv.DictReader(handle))["dpus"] == "128"

    def test_all_points_infeasible(self, capsys):
        """Test a sweep with no feasible point exits with the planning code."""
        code = main(["sweep", "--n", "4096", "--dpus", "2", "--strategy", "parallel", "--values", "1,2"])
        assert code == EXIT_INFEASIBLE
        assert "modulus-sequential" in capsys.readouterr().out

    def test_unknown_preset(self):
        """Test presets are limited to the known names."""
        with pytest.raises(SystemExit):
            main(["sweep", "--preset", "turbo"])

    def test_direct_platform(self, tmp_path):
        """Test --platform direct is recorded and shortens the transfer."""
        rows = {}
        for platform in ("upmem", "direct"):
            path = tmp_path / f"{platform}.csv"
            assert main(["sweep", "--n", "1024", "--values", "4", "--platform", platform, "--csv", str(path)]) == EXIT_OK
            with open(path, newline="", encoding="utf-8") as handle:
                rows[platform] = next(csv.DictReader(handle))
        assert rows["direct"]["platform"] == "direct"
        assert rows["direct"]["makespan_cycles"] == rows["upmem"]["makespan_cycles"]
        assert float(rows["direct"]["transfer_seconds"]) < float(rows["upmem"]["transfer_seconds"])

    def test_unknown_platform(self):
        """Test platforms are limited to the known names."""
        with pytest.raises(SystemExit):
            main(["sweep", "--platform", "cxl"])

    def test_missing_config(self, tmp_path):
        """Test an unreadable config file is a usage error."""
        assert main(["sweep", "--values", "1", "--config", str(tmp_path / "none.cfg")]) == EXIT_USAGE
