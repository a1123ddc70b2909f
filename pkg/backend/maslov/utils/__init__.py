"""Shared utilities: errors, linear algebra helpers, parallelism, curves, plotting."""
