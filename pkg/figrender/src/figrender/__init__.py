"""Render driftlock output files into figures.

This package does no physics: every number it draws comes from the CSV and
JSON files the driftlock CLI wrote.  The readers are strict about the
documented schemas so that a renderer mismatch is caught loudly rather than
plotted quietly.
"""

__version__ = "0.1.0"
