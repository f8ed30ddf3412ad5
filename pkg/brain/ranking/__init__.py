"""BM25 indexing, run files, evaluation measures and significance testing."""
