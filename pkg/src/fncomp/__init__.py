"""Rate/leakage regions and exact random-binning simulation for function
computation over a public broadcast channel."""

__version__ = "0.1.0"
