"""State-vector simulation of weak-measurement phase amplification."""

__version__ = "0.1.0"
