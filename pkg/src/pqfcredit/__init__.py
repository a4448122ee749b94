"""Hybrid quantum-classical credit-default pipeline in simulation."""
__version__ = "0.1.0"
