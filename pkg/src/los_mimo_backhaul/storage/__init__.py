"""Artifact and fixture persistence."""
