"""Core infrastructure: configuration, logging, errors and observability."""
