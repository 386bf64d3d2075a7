"""Utility modules for specsense."""
