"""Text layer: extraction, language id, corpus comparison, sessions and ranking."""
