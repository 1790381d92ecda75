"""Simulation commands: derive-params, evolve, scan, reproduce, selftest."""
