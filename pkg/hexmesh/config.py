import os

# --- Run Ledger Configuration ---
DB_PATH = os.environ.get('HEXMESH_DB_PATH', 'data/runs.db')

# --- Search Configuration ---
# '0' means auto-detect; unset leaves the decision to the settings table
THREADS_OVERRIDE = os.environ.get('HEXMESH_THREADS')

# --- Logging Configuration ---
LOG_LEVEL = os.environ.get('HEXMESH_LOG_LEVEL', 'INFO')

# --- HTTP Surface Configuration ---
API_PREFIX = os.environ.get('HEXMESH_API_PREFIX', '/hexmesh')


def resolve_threads(requested=None, default=0):
    """Pick the worker count: flag, then environment, then settings; 0 means all cores."""
    value = requested
    if value is None and THREADS_OVERRIDE not in (None, ''):
        try:
            value = int(THREADS_OVERRIDE)
        except ValueError:
            value = None
    if value is None:
        value = default
    if value <= 0:
        value = os.cpu_count() or 1
    return value
