"""Teacher/explorer/student open set recognition on desk-scale data."""

__version__ = "0.1.0"
