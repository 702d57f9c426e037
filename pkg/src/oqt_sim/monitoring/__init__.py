"""Prometheus metrics for runs."""
