"""Compact minimal vertical graphs in H^n x R: geometry, catenoids, certificates, solvers."""
__version__ = "0.1.0"
