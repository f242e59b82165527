"""Pydantic schemas for requests, reports and jobs."""
