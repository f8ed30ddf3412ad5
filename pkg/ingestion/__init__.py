"""Ingestion layer: query logs, URL universe and web-archive harvesting."""
