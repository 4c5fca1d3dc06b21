import datetime
import logging
from collections import deque

# --- In-Memory Log for the HTTP feed ---
live_log = deque(maxlen=50) # Store the last 50 entries for /api/logs

def add_log_entry(msg, level="info"):
    """Add an entry to the live log feed"""
    timestamp = datetime.datetime.now(datetime.timezone.utc).isoformat()
    live_log.append({"time": timestamp, "msg": msg, "level": level})

def log_search_stats(label, stats):
    """Log the one-line summary of a finished search"""
    logger = logging.getLogger(__name__)

    log_msg = (f"{label}: solutions={stats.solutions} nodes={stats.nodes} "
               f"backtracks={stats.backtracks} time={stats.elapsed_ms}ms")
    if stats.workers > 1:
        log_msg += f" workers={stats.workers} subproblems={stats.subproblems}"

    logger.info(log_msg)
    add_log_entry(f"SEARCH: {log_msg}", "info" if stats.solutions == 0 else "success")

def log_bound_step(mode, limit, status, stats):
    """Log one step of a lower-bound run"""
    logger = logging.getLogger(__name__)

    log_msg = f"BOUND: {mode}={limit} {status} (nodes={stats.nodes}, {stats.elapsed_ms}ms)"
    logger.info(log_msg)

    if status == "UNSAT":
        level = "success"
    elif status == "SAT":
        level = "warning"
    else:
        level = "error"
    add_log_entry(log_msg, level)

def log_performance(operation, duration_ms, details=None):
    """Log performance metrics"""
    logger = logging.getLogger(__name__)

    log_msg = f"PERF: {operation} took {duration_ms}ms"
    if details:
        log_msg += f" - {details}"

    logger.info(log_msg)

    # Grade by duration; searches are slow by nature
    if duration_ms < 1000:
        level = "fast"
    elif duration_ms < 60000:
        level = "normal"
    else:
        level = "slow"

    add_log_entry(log_msg, level)
