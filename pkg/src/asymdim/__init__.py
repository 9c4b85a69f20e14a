"""Dimensions of metric measure spaces at large and small scales, their spectral
counterparts (heat trace, counting function, Novikov-Shubin numbers) and
singular traces built from eigenvalue rearrangements."""

__version__ = "0.1.0"
