"""Symbol analysis, symmetrizers and persistent waves for the (1,-1) Cattaneo fluid system."""

__version__ = "0.1.0"
