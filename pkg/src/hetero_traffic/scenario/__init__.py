"""Scenario configuration, initial conditions and output writers."""
