"""AXY dynamical-decoupling two-qubit phase gate for trapped ions in a magnetic gradient."""

__version__ = "0.1.0"
