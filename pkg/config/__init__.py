"""Configuration package for the els toolkit."""
