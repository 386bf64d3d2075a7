"""Version information for specsense package."""

__version__ = "0.3.0"
