"""Mock archive route handlers."""

from interface.api.routes import health, wayback

__all__ = ["health", "wayback"]
