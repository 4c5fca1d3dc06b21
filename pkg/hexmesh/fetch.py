import logging
import time

import requests
from requests.adapters import HTTPAdapter
from urllib3.util.retry import Retry

from hexmesh.errors import InputError
from hexmesh.hexm_io import parse_hexm, read_msh
from hexmesh.logging_utils import add_log_entry, log_performance


def configure_session(session_to_configure=None, retry_total=5, retry_backoff_factor=0.5,
                      connect_timeout=10, read_timeout=60):
    """Mount a retrying adapter and default timeouts on a requests session."""
    if session_to_configure is None:
        session_to_configure = requests.Session()
    retry_strategy = Retry(
        total=retry_total,
        backoff_factor=retry_backoff_factor,
        status_forcelist=[429, 500, 502, 503, 504],
        allowed_methods=["HEAD", "GET"]
    )
    adapter = HTTPAdapter(max_retries=retry_strategy)
    session_to_configure.mount("http://", adapter)
    session_to_configure.mount("https://", adapter)
    session_to_configure.timeout = (connect_timeout, read_timeout)
    return session_to_configure


def session_from_settings(store):
    return configure_session(
        retry_total=store.get_int_setting('retry_total', 5),
        retry_backoff_factor=store.get_float_setting('retry_backoff_factor', 0.5),
        connect_timeout=store.get_float_setting('connect_timeout', 10),
        read_timeout=store.get_float_setting('read_timeout', 60),
    )


def fetch_mesh(url, session=None):
    """Download a .msh or .hexm file and return it as a HexmFile."""
    session = session or configure_session()
    start = time.time()
    try:
        resp = session.get(url, timeout=getattr(session, 'timeout', (10, 60)))
        resp.raise_for_status()
    except requests.exceptions.RequestException as e:
        add_log_entry(f"FETCH: {url} failed: {e}", "error")
        raise InputError(f"Could not download {url}: {e}") from e

    text = resp.text
    log_performance("fetch", int((time.time() - start) * 1000), f"{len(text)} bytes from {url}")
    if text.lstrip().startswith("$MeshFormat"):
        hf = read_msh(text)
    else:
        hf = parse_hexm(text)
    logging.info(f"Fetched {len(hf.hexes)} hexes and {hf.n_vertices} vertices from {url}")
    return hf
