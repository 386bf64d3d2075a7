"""Integration tests for specsense."""
