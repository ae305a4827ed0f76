"""Artifact repositories."""
