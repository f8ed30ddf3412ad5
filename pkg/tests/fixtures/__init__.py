"""Synthetic query logs and archive fixtures."""
