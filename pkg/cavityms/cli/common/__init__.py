"""Common class/functions for cli."""
