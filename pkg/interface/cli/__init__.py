"""Pipeline command line."""
