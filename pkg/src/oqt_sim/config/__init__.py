"""Runtime settings and scenario configuration."""
