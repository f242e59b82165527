"""Codec and ADE label helpers."""
