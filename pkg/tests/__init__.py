"""Test suite for the query-log corpus toolkit."""
