"""Tests package for the fine-interior toolkit."""
