"""Benchmark storage I/O for ML training and predict throughput from the results."""

__version__ = "0.1.0"
