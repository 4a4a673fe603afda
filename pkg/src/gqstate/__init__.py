"""Information dimension and dimensional entropy of geometric quantum states."""

__version__ = "0.1.0"
