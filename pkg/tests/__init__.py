"""Test suite for specsense."""
