"""Cavity MS numerical library."""
