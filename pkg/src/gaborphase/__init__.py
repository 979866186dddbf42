"""Phase retrieval from Gabor magnitudes of bandlimited signals."""

__version__ = "0.1.0"
