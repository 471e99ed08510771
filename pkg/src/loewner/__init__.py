"""Löwner subordination chains on truncated power series, their logarithmic
action, and the Virasoro-side identities around its time variation."""

__version__ = "0.1.0"
