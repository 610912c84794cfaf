"""Pulse-level simulator and benchmarking toolchain for two dipolar-coupled NV registers."""

__version__ = "1.0.0"
