"""netchrono: reconstruct the generation order of a static network's edges."""

__version__ = "0.1.0"
