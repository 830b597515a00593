"""Support recovery of sparse graph signals observed through graph filters."""

__version__ = "0.1.0"
