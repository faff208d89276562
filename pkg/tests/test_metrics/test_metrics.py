"""
Tests for throughput metrics and latency measurement.
"""
import numpy as np
import pytest

from src.errors import ContractViolation
from src.metrics import MetricsRecord, compute_metrics, measure_latency, summarize


class TestComputeMetrics:
    """Test suite for AM/GM/HM throughput."""

    def test_equal_rates(self):
        """Test equal rates give AM = GM = HM = rate * 14 / 0.5 ms."""
        record = compute_metrics(np.full((3, 5), 1.18))

        for value in (record.am, record.gm, record.hm):
            assert value == pytest.approx(33040.0)
        assert record.hm <= record.gm <= record.am

    def test_hand_computed_means(self):
        """Test rates {2, 8} in unscaled units give AM 5, GM 4, HM 3.2."""
        record = compute_metrics(np.array([[2.0, 8.0]]), n_s=1, t_s=1.0)

        assert record.am == pytest.approx(5.0)
        assert record.gm == pytest.approx(4.0)
        assert record.hm == pytest.approx(3.2)

    def test_zero_rate_annihilates(self):
        """Test a zero rate zeroes GM and HM for its timeslot only."""
        rates = np.array([[0.0, 4.0], [4.0, 4.0]])

        record = compute_metrics(rates, n_s=1, t_s=1.0)

        assert record.am == pytest.approx((2.0 + 4.0) / 2)
        assert record.gm == pytest.approx(2.0)
        assert record.hm == pytest.approx(2.0)
        assert record.zero_rate_count == 1

    def test_all_zero(self):
        """Test an all-zero grid yields exact zeros."""
        record = compute_metrics(np.zeros((2, 3)))

        assert (record.am, record.gm, record.hm) == (0.0, 0.0, 0.0)

    def test_inequality_chain_random(self):
        """Test HM <= GM <= AM on random grids, strict unless rates are equal."""
        rng = np.random.default_rng(0)
        for _ in range(200):
            rates = rng.uniform(0.1, 5.0, size=(4, 6))
            record = compute_metrics(rates)
            assert record.hm < record.gm < record.am

    def test_permutation_invariant(self):
        """Test shuffling devices leaves every metric unchanged."""
        rng = np.random.default_rng(1)
        rates = rng.uniform(0.0, 5.0, size=(5, 8))

        a = compute_metrics(rates)
        b = compute_metrics(rates[:, rng.permutation(8)])

        assert (a.am, a.gm, a.hm) == pytest.approx((b.am, b.gm, b.hm))

    def test_homogeneous_scaling(self):
        """Test scaling every rate by c scales all three means by c."""
        rates = np.random.default_rng(2).uniform(0.5, 3.0, size=(3, 4))

        a = compute_metrics(rates)
        b = compute_metrics(rates * 2.5)

        assert (b.am, b.gm, b.hm) == pytest.approx((2.5 * a.am, 2.5 * a.gm, 2.5 * a.hm))

    @pytest.mark.parametrize("rates", [
        np.array([1.0, 2.0]),
        np.array([[1.0, np.nan]]),
        np.array([[1.0, -0.5]]),
        np.zeros((0, 3)),
    ])
    def test_invalid_grids(self, rates):
        """Test malformed rate grids break the contract."""
        with pytest.raises(ContractViolation):
            compute_metrics(rates)

    def test_row_leaves_latency_blank(self):
        """Test unmeasured latencies serialize as empty cells."""
        row = compute_metrics(np.ones((1, 2)), realization_id="omega-3", scheduler="dqn_ia").to_row()

        assert row["latency_train_ms"] == ""
        assert row["realization_id"] == "omega-3"
        assert list(row) == MetricsRecord.columns()


class TestSummarize:
    """Test suite for box-plot statistics."""

    def test_quartiles(self):
        """Test median and quartiles over records."""
        records = [compute_metrics(np.full((1, 2), r), n_s=1, t_s=1.0) for r in (1.0, 2.0, 3.0, 4.0, 5.0)]

        summary = summarize(records)

        assert summary["gm"] == pytest.approx({"q1": 2.0, "median": 3.0, "q3": 4.0})


class TestMeasureLatency:
    """Test suite for per-timeslot latency."""

    def test_noop_is_fast(self):
        """Test a no-op callable measures close to zero."""
        assert measure_latency(lambda: None, repetitions=20) < 1.0

    def test_divides_by_timeslots(self, mocker):
        """Test the median is divided by the number of timeslots per call."""
        clock = mocker.patch("src.metrics.time")
        clock.perf_counter.side_effect = [0.0, 0.02] * 10

        assert measure_latency(lambda: None, repetitions=10, timeslots=20) == pytest.approx(1.0)

    def test_too_few_repetitions(self):
        """Test fewer than 10 repetitions is refused."""
        with pytest.raises(ContractViolation):
            measure_latency(lambda: None, repetitions=5)
