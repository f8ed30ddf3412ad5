"""Interface layer: pipeline command line and mock archive service."""
