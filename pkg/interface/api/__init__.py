"""Mock Wayback archive service (FastAPI)."""
