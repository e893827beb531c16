"""Tests for the randomized verification suites."""

import pytest

from pimring.bench.selfcheck import SUITES, corrupt_tables, verify
from pimring.ring.ntt import build_base_twiddles
from pimring.ring.rns import build_base


class TestVerify:
    """Tests for verify()."""

    def test_all_suites_pass(self):
        """Test correct tables pass every suite."""
        report = verify(64, 54, trials=3, seed=7)
        assert report.passed
        assert [r.name for r in report.results] == list(SUITES)
        assert all(r.trials == 3 for r in report.results)
        assert report.first_failure is None

    def test_corrupted_twiddles_fail(self):
        """Test a broken forward twiddle is caught with its seed."""
        report = verify(64, 27, trials=3, seed=11, corrupt_twiddles=True)
        assert not report.passed
        failure = report.first_failure
        assert failure.name == "ntt-round-trip"
        assert failure.failing_seed == 11
        assert failure.trials == 1
        failed = {r.name for r in report.results if not r.passed}
        assert failed == {"ntt-round-trip", "convolution-theorem"}

    def test_zero_trials(self, caplog):
        """Test zero trials passes vacuously with a warning."""
        report = verify(64, 27, trials=0)
        assert report.passed
        assert "nothing to verify" in caplog.text

    def test_same_seed_same_result(self):
        """Test failures reproduce from the reported seed."""
        first = verify(32, 27, trials=2, seed=5, corrupt_twiddles=True).first_failure
        again = verify(32, 27, trials=1, seed=first.failing_seed, corrupt_twiddles=True)
        assert again.first_failure.detail == first.detail


class TestCorruptTables:
    """Tests for deliberately corrupted tables."""

    def test_only_one_entry_changes(self):
        """Test exactly forward[1] differs."""
        tables = build_base_twiddles(build_base(16, 54), 16)
        bad = corrupt_tables(tables)
        for good, broken in zip(tables, bad):
            diff = (good.forward != broken.forward).nonzero()[0].tolist()
            assert diff == [1]
            assert (good.inverse_scrambled == broken.inverse_scrambled).all()

    @pytest.mark.slow
    def test_standard_length(self):
        """Test the suites at n=4096 with the default coefficient size."""
        assert verify(4096, 109, trials=2).passed
