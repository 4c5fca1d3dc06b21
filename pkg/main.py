import sys
import logging
from flask import Flask, jsonify
from dotenv import load_dotenv
from flasgger import Swagger

# Load environment variables from .env file
load_dotenv()

# --- App Imports ---
from hexmesh.config import API_PREFIX, LOG_LEVEL
from hexmesh.cli import run_cli

# --- Logging Configuration ---
def configure_logging(log_level='INFO'):
    """Configure logging with the specified level"""
    logging.basicConfig(
        level=getattr(logging, log_level.upper(), logging.INFO),
        format='%(asctime)s - %(levelname)s - %(message)s'
    )
    logging.getLogger().setLevel(getattr(logging, log_level.upper(), logging.INFO))

# Initialize with the environment's logging level
configure_logging(LOG_LEVEL)

# --- Swagger Configuration ---
swagger_config = {
    "headers": [],
    "specs": [
        {
            "endpoint": 'apispec',
            "route": f'{API_PREFIX}/apispec.json',
            "rule_filter": lambda rule: True,
            "model_filter": lambda tag: True,
        }
    ],
    "static_url_path": f"{API_PREFIX}/flasgger_static",
    "swagger_ui": True,
    "specs_route": f"{API_PREFIX}/swagger/"
}

swagger_template = {
    "swagger": "2.0",
    "info": {
        "title": "Hexmesh",
        "description": "Enumerate hexahedral meshes of a quad boundary, refute lower bounds and validate meshes.",
        "version": "1.0.0"
    },
    "basePath": "/",
    "schemes": ["http", "https"],
}


# --- Flask App Initialization ---
def create_app():
    from hexmesh.api_routes import api_bp

    app = Flask(__name__)
    Swagger(app, config=swagger_config, template=swagger_template)
    app.register_blueprint(api_bp)

    @app.route(f'{API_PREFIX}/health')
    def health():
        return jsonify({"status": "ok"})

    return app


# --- Main Execution ---
if __name__ == '__main__':
    sys.exit(run_cli(sys.argv[1:]))
