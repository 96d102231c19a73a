"""Pre-publication news popularity forecasting toolkit."""

__version__ = "0.1.0"
