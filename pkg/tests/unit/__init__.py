"""Unit tests for specsense."""
