"""Atlas verification jobs."""
