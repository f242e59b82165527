"""Shared schema package."""
