"""Tests for modulus-based work planning."""

import pytest

from pimring.errors import DomainError, PlanningError
from pimring.pim.model import KernelKind, PlatformModel
from pimring.pim.planner import (
    Role,
    Strategy,
    WorkItem,
    plan_work,
    resolve_strategy,
    roles_for,
)
from pimring.ring.ntt import Threading


class TestStrategy:
    """Tests for strategy names and AUTO resolution."""

    def test_from_name(self):
        """Test value and enum-name spellings."""
        assert Strategy.from_name("sequential") is Strategy.MODULUS_SEQUENTIAL
        assert Strategy.from_name("modulus-parallel") is Strategy.MODULUS_PARALLEL
        with pytest.raises(DomainError):
            Strategy.from_name("diagonal")

    @pytest.mark.parametrize(
        ("dpus", "expected"),
        [
            (128, Strategy.MODULUS_SEQUENTIAL),
            (192, Strategy.MODULUS_PARALLEL),
            (256, Strategy.MODULUS_SEQUENTIAL),
            (383, Strategy.MODULUS_PARALLEL),
            (509, Strategy.MODULUS_SEQUENTIAL),
        ],
    )
    def test_auto_for_three_moduli(self, dpus, expected):
        """Test AUTO goes parallel only when the ranks divide into three groups."""
        assert resolve_strategy(Strategy.AUTO, 3, PlatformModel.with_dpus(dpus)) is expected

    def test_explicit_strategy_kept(self):
        """Test non-AUTO strategies pass through."""
        platform = PlatformModel()
        assert resolve_strategy(Strategy.MODULUS_PARALLEL, 3, platform) is Strategy.MODULUS_PARALLEL


class TestPlanWork:
    """Tests for plan_work."""

    def test_uneven_groups(self):
        """Test 256 DPUs over three moduli split 86/85/85."""
        plan = plan_work(10, 3, PlatformModel.with_dpus(256))
        assert sorted(plan.group_sizes, reverse=True) == [86, 85, 85]
        assert sum(plan.group_sizes) == 256
        assert plan.imbalanced

    def test_rank_aligned_groups(self):
        """Test six ranks over three moduli give two full ranks per group."""
        plan = plan_work(10, 3, PlatformModel.with_dpus(384))
        assert plan.group_sizes == (128, 128, 128)
        assert not plan.imbalanced

    def test_every_item_once_and_on_its_modulus(self):
        """Test the assignment invariants on the default platform."""
        plan = plan_work(1000, 4, PlatformModel())
        plan.validate()
        items = [item for dpu in plan.assignment for item in dpu]
        assert len(items) == 1000 * 4 * 2
        for dpu, held in enumerate(plan.assignment):
            assert all(item.modulus == plan.dpu_modulus[dpu] for item in held)

    def test_roles_stay_together(self):
        """Test both polynomials of a ciphertext share a DPU."""
        plan = plan_work(7, 2, PlatformModel.with_dpus(4))
        for held in plan.assignment:
            keys = {(item.ciphertext, item.modulus) for item in held}
            for key in keys:
                assert {item.role for item in held if (item.ciphertext, item.modulus) == key} == {
                    Role.CT0,
                    Role.CT1,
                }

    def test_round_robin_within_group(self):
        """Test ciphertexts spread evenly inside each modulus group."""
        plan = plan_work(10, 2, PlatformModel.with_dpus(128))
        counts = [plan.ciphertexts_on(dpu, plan.dpu_modulus[dpu]) for dpu in range(128)]
        assert max(counts) - min(counts) <= 1
        assert plan.ciphertexts_on(0, 0) == 1

    def test_bgv_roles(self):
        """Test multiplication keeps both operands resident."""
        plan = plan_work(3, 2, PlatformModel.with_dpus(2), phases=[KernelKind.BGV_MUL])
        assert plan.roles == (Role.CT0, Role.CT1, Role.RHS0, Role.RHS1)
        assert len(plan.assignment[0]) == 3 * 4
        assert roles_for([KernelKind.NTT]) == (Role.CT0, Role.CT1)

    def test_too_few_dpus(self):
        """Test parallel planning with fewer DPUs than moduli."""
        with pytest.raises(PlanningError, match="modulus-sequential"):
            plan_work(1, 4, PlatformModel.with_dpus(2))

    def test_sequential(self):
        """Test sequential plans keep every modulus of a ciphertext on one DPU."""
        plan = plan_work(5, 4, PlatformModel.with_dpus(2), strategy=Strategy.MODULUS_SEQUENTIAL)
        plan.validate()
        assert plan.group_sizes == (2,)
        assert plan.dpu_modulus == (None, None)
        assert len(plan.assignment[0]) == 3 * 4 * 2
        assert {item.modulus for item in plan.assignment[1]} == {0, 1, 2, 3}

    def test_zero_ciphertexts(self):
        """Test an empty workload yields empty DPUs."""
        plan = plan_work(0, 2, PlatformModel.with_dpus(4))
        assert all(not held for held in plan.assignment)
        plan.validate()

    def test_threading_hint(self):
        """Test the threading hint applies to both transforms."""
        plan = plan_work(1, 1, PlatformModel.with_dpus(1), threading=Threading.FINE_GRAINED)
        assert plan.threading_for(KernelKind.NTT) is Threading.FINE_GRAINED
        assert plan.threading_for(KernelKind.INTT) is Threading.FINE_GRAINED
        assert plan.threading_for(KernelKind.POINTWISE_MUL) is Threading.COARSE_GRAINED

    def test_validate_catches_duplicates(self):
        """Test validate() rejects an item placed twice."""
        plan = plan_work(1, 1, PlatformModel.with_dpus(2))
        plan.assignment[1].append(WorkItem(0, 0, Role.CT0))
        with pytest.raises(PlanningError):
            plan.validate()

    def test_validate_catches_missing(self):
        """Test validate() rejects a dropped item."""
        plan = plan_work(1, 1, PlatformModel.with_dpus(2))
        plan.assignment[0].pop()
        with pytest.raises(PlanningError):
            plan.validate()

    def test_negative_count(self):
        """Test a negative ciphertext count."""
        with pytest.raises(DomainError):
            plan_work(-1, 1, PlatformModel())
