import logging

from flask import json

from main import configure_logging, create_app


class TestMain:
    """Test main application setup."""

    def test_app_creation(self, app):
        """Test Flask app is created with the API registered."""
        assert app is not None
        assert app.name == 'main'
        assert 'api' in app.blueprints

    def test_fresh_app_per_call(self):
        """Test every call builds an independent app."""
        assert create_app() is not create_app()

    def test_health(self, client):
        """Test the health endpoint."""
        response = client.get('/hexmesh/health')
        assert response.status_code == 200
        assert json.loads(response.data) == {"status": "ok"}

    def test_swagger_config(self, app):
        """Test Swagger is configured."""
        with app.test_client() as client:
            response = client.get('/hexmesh/swagger/')
            assert response.status_code == 200

    def test_apispec_lists_routes(self, client):
        """Test the Swagger document lists the search endpoints."""
        doc = json.loads(client.get('/hexmesh/apispec.json').data)
        assert '/hexmesh/api/enumerate' in doc['paths']
        assert '/hexmesh/api/bound' in doc['paths']

    def test_configure_logging(self):
        """Test logging configuration."""
        configure_logging('DEBUG')
        assert logging.getLogger().level == logging.DEBUG
        configure_logging('INFO')
        assert logging.getLogger().level == logging.INFO

    def test_configure_logging_unknown_level(self):
        """Test an unknown level falls back to INFO."""
        configure_logging('CHATTY')
        assert logging.getLogger().level == logging.INFO
