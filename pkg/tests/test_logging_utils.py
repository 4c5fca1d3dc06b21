import logging
from collections import deque

import pytest

from hexmesh.logging_utils import add_log_entry, live_log, log_bound_step, log_performance, log_search_stats
from hexmesh.search import SearchStats


class TestLoggingUtils:
    """Test logging utilities."""

    @pytest.fixture(autouse=True)
    def info_level(self, caplog):
        caplog.set_level(logging.INFO)

    def test_live_log_is_deque(self):
        """Test live_log is a deque with maxlen 50."""
        assert isinstance(live_log, deque)
        assert live_log.maxlen == 50

    def test_add_log_entry(self):
        """Test adding log entry."""
        add_log_entry("Test message", "warning")
        entry = live_log[-1]
        assert "time" in entry
        assert entry["msg"] == "Test message"
        assert entry["level"] == "warning"

    def test_live_log_is_bounded(self):
        """Test old entries fall off the feed."""
        for i in range(60):
            add_log_entry(f"entry {i}")
        assert len(live_log) == 50
        assert live_log[-1]["msg"] == "entry 59"

    def test_search_stats(self, caplog):
        """Test a finished search is logged with its counters."""
        log_search_stats("enumerate", SearchStats(nodes=10, backtracks=4, solutions=1, elapsed_ms=3))
        assert "enumerate: solutions=1 nodes=10" in caplog.text
        assert live_log[-1]["level"] == "success"

    def test_search_stats_parallel(self, caplog):
        """Test parallel runs mention their workers."""
        log_search_stats("bound", SearchStats(workers=4, subproblems=32))
        assert "workers=4 subproblems=32" in caplog.text
        assert live_log[-1]["level"] == "info"

    @pytest.mark.parametrize("status,level", [("UNSAT", "success"), ("SAT", "warning"), ("BUDGET", "error")])
    def test_bound_step_levels(self, caplog, status, level):
        """Test bound steps are graded by outcome."""
        log_bound_step("hexahedra", 3, status, SearchStats(nodes=5, elapsed_ms=1))
        assert f"hexahedra=3 {status}" in caplog.text
        assert live_log[-1]["level"] == level

    @pytest.mark.parametrize("duration,level", [(10, "fast"), (5000, "normal"), (120000, "slow")])
    def test_log_performance(self, caplog, duration, level):
        """Test performance logging grades by duration."""
        log_performance("simplify", duration, "cavity 12")
        assert f"PERF: simplify took {duration}ms - cavity 12" in caplog.text
        assert live_log[-1]["level"] == level
