"""Numerical certificates that purifications of PPT edge states are not
reversibly obtainable from EPR and GHZ states."""

__version__ = "0.1.0"
