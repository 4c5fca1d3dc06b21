from dataclasses import asdict

from flask import jsonify, request, Blueprint

from hexmesh.combinatorics import QuadSurface
from hexmesh.config import API_PREFIX, DB_PATH
from hexmesh.errors import BudgetExceeded, HexMeshError, InputError
from hexmesh.geometry import validity
from hexmesh.hexm_io import parse_hexm
from hexmesh.logging_utils import live_log, log_bound_step, log_search_stats
from hexmesh.parallel import parallel_search
from hexmesh.run_store import RunStore, boundary_digest
from hexmesh.search import SearchLimits

api_bp = Blueprint('api', __name__)
run_store = RunStore(DB_PATH)

# Solutions returned inline by /enumerate at most
MAX_INLINE_SOLUTIONS = 100

# key -> (type, minimum, maximum)
VALID_SETTINGS = {
    'threads': (int, 0, 1024),
    'target_per_thread': (int, 1, 1 << 20),
    'budget_secs': (float, 0.1, 86400.0),
    'cavity_min': (int, 2, 200),
    'cavity_max': (int, 2, 200),
    'cavity_retries': (int, 1, 10000),
    'cavities_per_size': (int, 1, 10000),
    'samples': (int, 0, 10),
    'untangle_max_iters': (int, 1, 100000),
    'retry_total': (int, 0, 100),
    'retry_backoff_factor': (float, 0.0, 5.0),
    'connect_timeout': (float, 1.0, 60.0),
    'read_timeout': (float, 5.0, 300.0),
}
LOG_LEVELS = ['DEBUG', 'INFO', 'WARNING', 'ERROR']


def _error(message, status=400):
    return jsonify({"success": False, "message": message}), status


def _surface_from(data):
    """Boundary from a JSON body: either 'hexm' file text or a 'quads' list."""
    if 'hexm' in data:
        return parse_hexm(data['hexm']).surface()
    if 'quads' in data:
        try:
            quads = [tuple(int(v) for v in q) for q in data['quads']]
        except (TypeError, ValueError):
            raise InputError("quads must be a list of 4-label lists")
        if any(len(q) != 4 for q in quads):
            raise InputError("Every quad needs exactly 4 labels")
        return QuadSurface(quads)
    raise InputError("Provide the boundary as 'hexm' text or a 'quads' list")


def _int_field(data, key, default=None, minimum=0):
    value = data.get(key, default)
    if value is None:
        return None
    try:
        value = int(value)
    except (TypeError, ValueError):
        raise InputError(f"Invalid value for {key}: expected int")
    if value < minimum:
        raise InputError(f"{key} must be at least {minimum}")
    return value


def _validated_setting(key, value):
    """The value coerced to the setting's type; InputError when it is unknown or out of range."""
    if key == 'log_level':
        if value not in LOG_LEVELS:
            raise InputError(f"log_level must be one of: {', '.join(LOG_LEVELS)}")
        return value
    if key not in VALID_SETTINGS:
        raise InputError(f"Unknown setting {key}")
    expected_type, low, high = VALID_SETTINGS[key]
    try:
        value = expected_type(value)
    except (ValueError, TypeError):
        raise InputError(f"Invalid value for {key}: expected {expected_type.__name__}")
    if not low <= value <= high:
        raise InputError(f"{key} must be between {low} and {high}")
    return value


def _check_cavity_range(changes):
    merged = {**run_store.get_all_settings(), **changes}
    if merged.get('cavity_min', 0) > merged.get('cavity_max', 1 << 30):
        raise InputError("cavity_min must not exceed cavity_max")


def _apply_log_level(changes):
    # Logging changes apply immediately
    if 'log_level' in changes:
        from main import configure_logging
        configure_logging(changes['log_level'])


@api_bp.route(f'{API_PREFIX}/api/enumerate', methods=['POST'])
def enumerate_meshes():
    """
    Enumerate the hex meshes of a boundary
    ---
    tags:
      - Search
    parameters:
      - name: body
        in: body
        required: true
        schema:
          type: object
          properties:
            quads:
              type: array
              items:
                type: array
                items:
                  type: integer
            hexm:
              type: string
            max_hex:
              type: integer
            max_vertices:
              type: integer
            max_solutions:
              type: integer
            threads:
              type: integer
            budget_secs:
              type: number
            include_solutions:
              type: boolean
    responses:
      200:
        description: Solution count, search statistics and optionally the solutions
      400:
        description: Invalid boundary or limits
      422:
        description: Search budget exhausted
    """
    data = request.get_json(silent=True)
    if not data:
        return _error("No request data provided")
    try:
        surface = _surface_from(data)
        surface.validate()
        h_max = _int_field(data, 'max_hex')
        v_max = _int_field(data, 'max_vertices')
        if h_max is None or v_max is None:
            return _error("max_hex and max_vertices are required")
        budget = float(data.get('budget_secs', run_store.get_float_setting('budget_secs', 30.0)))
        limits = SearchLimits(h_max, v_max, _int_field(data, 'max_solutions', minimum=1)).with_budget(budget)
        found = []
        sink = found.append if data.get('include_solutions') else None
        stats = parallel_search(surface, limits, n_threads=_int_field(data, 'threads', 1, minimum=1),
                                sink=sink,
                                target_per_thread=run_store.get_int_setting('target_per_thread', 4096))
    except BudgetExceeded as e:
        return _error(str(e), 422)
    except HexMeshError as e:
        return _error(str(e))

    log_search_stats("api enumerate", stats)
    run_store.record_run('enumerate', 'SAT' if stats.solutions else 'UNSAT', stats,
                         boundary_digest(surface), h_max=h_max, v_max=v_max)
    body = {"success": True, "solutions": stats.solutions, "stats": asdict(stats)}
    if sink is not None:
        body["meshes"] = [s.hexes for s in found[:MAX_INLINE_SOLUTIONS]]
    return jsonify(body)


@api_bp.route(f'{API_PREFIX}/api/bound', methods=['POST'])
def bound():
    """
    Run the search with increasing limits and report SAT/UNSAT per step
    ---
    tags:
      - Search
    parameters:
      - name: body
        in: body
        required: true
        schema:
          type: object
          properties:
            quads:
              type: array
              items:
                type: array
                items:
                  type: integer
            mode:
              type: string
              enum: [interior-vertices, hexahedra]
            from:
              type: integer
            to:
              type: integer
            budget_secs:
              type: number
    responses:
      200:
        description: One entry per limit with its status
      400:
        description: Invalid boundary or range
    """
    data = request.get_json(silent=True)
    if not data:
        return _error("No request data provided")
    mode = data.get('mode')
    if mode not in ('interior-vertices', 'hexahedra'):
        return _error("mode must be one of: interior-vertices, hexahedra")
    try:
        surface = _surface_from(data)
        surface.validate()
        start, stop = _int_field(data, 'from'), _int_field(data, 'to')
        if start is None or stop is None or stop < start:
            return _error("from and to are required and from must not exceed to")
        budget = float(data.get('budget_secs', run_store.get_float_setting('budget_secs', 30.0)))
    except HexMeshError as e:
        return _error(str(e))

    nb = surface.n_vertices
    digest = boundary_digest(surface)
    steps = []
    for k in range(start, stop + 1):
        h_max, v_max = (10 ** 6, nb + k) if mode == 'interior-vertices' else (k, nb + 4 * k)
        limits = SearchLimits(h_max, v_max, max_solutions=1).with_budget(budget)
        try:
            stats = parallel_search(surface, limits)
        except BudgetExceeded as e:
            steps.append({"limit": k, "status": "BUDGET"})
            run_store.record_run('bound', 'BUDGET', getattr(e, 'stats', None), digest, mode, k, h_max, v_max)
            break
        status = "SAT" if stats.solutions else "UNSAT"
        log_bound_step(mode, k, status, stats)
        run_store.record_run('bound', status, stats, digest, mode, k, h_max, v_max)
        steps.append({"limit": k, "status": status, "nodes": stats.nodes, "elapsed_ms": stats.elapsed_ms})
    return jsonify({"success": True, "mode": mode, "steps": steps})


@api_bp.route(f'{API_PREFIX}/api/validate', methods=['POST'])
def validate_mesh():
    """
    Check a mesh for non-positive sampled Jacobians
    ---
    tags:
      - Geometry
    parameters:
      - name: body
        in: body
        required: true
        schema:
          type: object
          properties:
            hexm:
              type: string
            samples:
              type: integer
    responses:
      200:
        description: Validity report
      400:
        description: Malformed mesh
    """
    data = request.get_json(silent=True)
    if not data or 'hexm' not in data:
        return _error("Provide the mesh as 'hexm' text")
    try:
        mesh = parse_hexm(data['hexm']).geo_mesh()
        mesh.complex(check=True)
        samples = _int_field(data, 'samples', run_store.get_int_setting('samples', 3))
        report = validity(mesh, samples)
    except HexMeshError as e:
        return _error(str(e))
    return jsonify({
        "success": True,
        "valid": report.valid,
        "min_corner_jacobian": report.min_corner_jacobian,
        "min_jacobian": report.min_jacobian,
        "invalid_hexes": report.invalid_hexes,
    })


@api_bp.route(f'{API_PREFIX}/api/runs', methods=['GET'])
def get_runs():
    """
    List recorded runs, most recent first
    ---
    tags:
      - Runs
    parameters:
      - name: limit
        in: query
        type: integer
      - name: command
        in: query
        type: string
    responses:
      200:
        description: Recorded runs
    """
    limit = request.args.get('limit', 50, type=int)
    return jsonify(run_store.get_runs(limit=limit, command=request.args.get('command')))


@api_bp.route(f'{API_PREFIX}/api/logs', methods=['GET'])
def get_logs():
    """
    Get live logs
    ---
    tags:
      - Logs
    responses:
      200:
        description: List of live log entries
    """
    return jsonify(list(live_log))


@api_bp.route(f'{API_PREFIX}/api/settings', methods=['GET'])
def get_settings():
    """
    Get all current settings
    ---
    tags:
      - Settings
    responses:
      200:
        description: Current settings values
    """
    return jsonify(run_store.get_all_settings())


@api_bp.route(f'{API_PREFIX}/api/settings', methods=['POST'])
def update_settings():
    """
    Update settings
    ---
    tags:
      - Settings
    parameters:
      - name: body
        in: body
        required: true
        schema:
          type: object
    responses:
      200:
        description: Settings updated successfully
      400:
        description: Invalid settings provided
    """
    data = request.get_json(silent=True)
    if not data:
        return _error("No settings data provided")

    try:
        validated_settings = {key: _validated_setting(key, value) for key, value in data.items()}
        _check_cavity_range(validated_settings)
    except InputError as e:
        return _error(str(e))

    run_store.update_settings(validated_settings)
    _apply_log_level(validated_settings)
    return jsonify({"success": True, "message": "Settings updated successfully"})


@api_bp.route(f'{API_PREFIX}/api/settings/<setting_key>', methods=['GET'])
def get_setting(setting_key):
    """
    Get a specific setting value
    ---
    tags:
      - Settings
    parameters:
      - name: setting_key
        in: path
        type: string
        required: true
    responses:
      200:
        description: Setting value
      404:
        description: Setting not found
    """
    value = run_store.get_setting(setting_key)
    if value is None:
        return jsonify({"error": "Setting not found"}), 404
    return jsonify({"key": setting_key, "value": value})


@api_bp.route(f'{API_PREFIX}/api/settings/<setting_key>', methods=['PUT'])
def put_setting(setting_key):
    """
    Set a single setting
    ---
    tags:
      - Settings
    parameters:
      - name: setting_key
        in: path
        type: string
        required: true
      - name: body
        in: body
        required: true
        schema:
          type: object
          properties:
            value: {}
    responses:
      200:
        description: Setting updated
      400:
        description: Unknown setting or invalid value
    """
    data = request.get_json(silent=True)
    if not data or 'value' not in data:
        return _error("Provide the new value as 'value'")
    try:
        value = _validated_setting(setting_key, data['value'])
        _check_cavity_range({setting_key: value})
    except InputError as e:
        return _error(str(e))

    run_store.set_setting(setting_key, value)
    _apply_log_level({setting_key: value})
    return jsonify({"success": True, "key": setting_key, "value": value})
