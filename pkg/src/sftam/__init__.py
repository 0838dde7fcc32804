"""Tile self-assembly on polycube surfaces, with a genus-detecting system."""

__version__ = "0.1.0"
