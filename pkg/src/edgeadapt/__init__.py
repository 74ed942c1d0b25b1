"""Design and replay energy-aware self-adaptive edge applications."""

__version__ = "0.1.0"
