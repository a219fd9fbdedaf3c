"""Preset experiments and the concurrent trial runner."""
