"""Worker pool module."""
