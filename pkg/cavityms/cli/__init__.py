"""Cavity MS cli.

cavityms: derive parameters, run scenarios, reproduce figures and tables
"""

from cavityms.cli.main import app, main

__all__ = ["app", "main"]
