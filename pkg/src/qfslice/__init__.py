"""Quasi-Fuchsian slices of the once-punctured torus in complex Fenchel-Nielsen coordinates."""

__version__ = "0.1.0"
