"""Transformation passes."""
