import os
import json
import logging
import sqlite3
import threading
import hashlib

DEFAULT_SETTINGS = {
    # Search
    'threads': '0',
    'target_per_thread': '4096',
    'budget_secs': '30',

    # Simplification
    'cavity_min': '6',
    'cavity_max': '18',
    'cavity_retries': '32',
    'cavities_per_size': '8',

    # Geometry
    'samples': '3',
    'untangle_max_iters': '1000',

    # Remote meshes
    'retry_total': '5',
    'retry_backoff_factor': '0.5',
    'connect_timeout': '10',
    'read_timeout': '60',

    # Logging
    'log_level': 'INFO',
}


def boundary_digest(surface):
    """Stable short hash of a boundary's canonical quad set."""
    payload = json.dumps(sorted(surface.quads)).encode()
    return hashlib.sha256(payload).hexdigest()[:16]


class RunStore:
    """A thread-safe sqlite ledger of search runs plus the persistent settings table."""
    def __init__(self, db_path='data/runs.db'):
        self.db_path = db_path
        self.lock = threading.RLock()
        if db_path != ':memory:' and os.path.dirname(db_path):
            os.makedirs(os.path.dirname(db_path), exist_ok=True)
        self.conn = sqlite3.connect(db_path, check_same_thread=False)
        self.conn.row_factory = sqlite3.Row
        self._initialize_db()
        self.ensure_default_settings()

    def _initialize_db(self):
        with self.lock:
            cursor = self.conn.cursor()

            # --- Create 'runs' table if it doesn't exist ---
            cursor.execute("""
                CREATE TABLE IF NOT EXISTS runs (
                    id INTEGER PRIMARY KEY AUTOINCREMENT,
                    command TEXT NOT NULL,
                    boundary_digest TEXT NOT NULL DEFAULT '',
                    mode TEXT,
                    limit_value INTEGER,
                    h_max INTEGER,
                    v_max INTEGER,
                    status TEXT NOT NULL,
                    solutions INTEGER NOT NULL DEFAULT 0,
                    nodes INTEGER NOT NULL DEFAULT 0,
                    elapsed_ms INTEGER NOT NULL DEFAULT 0,
                    created_at TIMESTAMP DEFAULT CURRENT_TIMESTAMP
                )
            """)

            # --- Create 'settings' table for configuration ---
            cursor.execute("""
                CREATE TABLE IF NOT EXISTS settings (
                    key TEXT PRIMARY KEY,
                    value TEXT NOT NULL,
                    created_at TIMESTAMP DEFAULT CURRENT_TIMESTAMP,
                    updated_at TIMESTAMP DEFAULT CURRENT_TIMESTAMP
                )
            """)
            self.conn.commit()

    # --- Run ledger ---
    def record_run(self, command, status, stats=None, digest='', mode=None, limit=None,
                   h_max=None, v_max=None):
        """Append one run; returns its id."""
        with self.lock:
            cursor = self.conn.cursor()
            cursor.execute("""
                INSERT INTO runs (command, boundary_digest, mode, limit_value, h_max, v_max,
                                  status, solutions, nodes, elapsed_ms)
                VALUES (?, ?, ?, ?, ?, ?, ?, ?, ?, ?)
            """, (command, digest, mode, limit, h_max, v_max, status,
                  getattr(stats, 'solutions', 0), getattr(stats, 'nodes', 0),
                  getattr(stats, 'elapsed_ms', 0)))
            self.conn.commit()
            return cursor.lastrowid

    def get_runs(self, limit=50, command=None):
        """Most recent runs first."""
        with self.lock:
            cursor = self.conn.cursor()
            if command:
                cursor.execute("SELECT * FROM runs WHERE command = ? ORDER BY id DESC LIMIT ?",
                               (command, limit))
            else:
                cursor.execute("SELECT * FROM runs ORDER BY id DESC LIMIT ?", (limit,))
            return [dict(row) for row in cursor.fetchall()]

    # --- Settings ---
    def get_setting(self, key, default=None):
        """Get a setting value from the database."""
        with self.lock:
            cursor = self.conn.cursor()
            cursor.execute("SELECT value FROM settings WHERE key = ?", (key,))
            row = cursor.fetchone()
            return row['value'] if row else default

    def get_int_setting(self, key, default):
        try:
            return int(self.get_setting(key, default))
        except (TypeError, ValueError):
            logging.warning(f"Setting {key} is not an integer; using {default}")
            return default

    def get_float_setting(self, key, default):
        try:
            return float(self.get_setting(key, default))
        except (TypeError, ValueError):
            logging.warning(f"Setting {key} is not a number; using {default}")
            return default

    def set_setting(self, key, value):
        """Set a setting value in the database."""
        with self.lock:
            cursor = self.conn.cursor()
            cursor.execute("""
                INSERT INTO settings (key, value, updated_at)
                VALUES (?, ?, CURRENT_TIMESTAMP)
                ON CONFLICT(key) DO UPDATE SET
                value = excluded.value,
                updated_at = CURRENT_TIMESTAMP
            """, (key, str(value)))
            self.conn.commit()

    def get_all_settings(self):
        """Get all settings as a dictionary."""
        with self.lock:
            cursor = self.conn.cursor()
            cursor.execute("SELECT key, value FROM settings")
            settings = {}
            for row in cursor.fetchall():
                value = row['value']
                if value is None:
                    continue
                elif value.lower() in ('true', 'false'):
                    settings[row['key']] = value.lower() == 'true'
                elif value.lstrip('-').isdigit():
                    settings[row['key']] = int(value)
                else:
                    try:
                        settings[row['key']] = float(value)
                    except ValueError:
                        settings[row['key']] = value
            return settings

    def update_settings(self, settings_dict):
        """Update multiple settings at once."""
        with self.lock:
            cursor = self.conn.cursor()
            for key, value in settings_dict.items():
                cursor.execute("""
                    INSERT INTO settings (key, value, updated_at)
                    VALUES (?, ?, CURRENT_TIMESTAMP)
                    ON CONFLICT(key) DO UPDATE SET
                    value = excluded.value,
                    updated_at = CURRENT_TIMESTAMP
                """, (key, str(value)))
            self.conn.commit()

    def ensure_default_settings(self):
        """Ensure all required default settings exist in the database."""
        with self.lock:
            cursor = self.conn.cursor()
            for key, default_value in DEFAULT_SETTINGS.items():
                cursor.execute("SELECT value FROM settings WHERE key = ?", (key,))
                if not cursor.fetchone():
                    cursor.execute("""
                        INSERT INTO settings (key, value, updated_at)
                        VALUES (?, ?, CURRENT_TIMESTAMP)
                    """, (key, default_value))
            self.conn.commit()
