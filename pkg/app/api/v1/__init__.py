"""API v1."""

