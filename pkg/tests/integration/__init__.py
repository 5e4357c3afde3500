"""Integration tests for the full pipeline."""
