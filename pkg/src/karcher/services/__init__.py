"""Numerical services: geometry, measures, means, flows, experiments and checks."""
