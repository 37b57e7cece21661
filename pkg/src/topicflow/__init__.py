"""Time-sliced topic detection, evolution linking, and emergence ranking."""

__version__ = "0.1.0"
