"""Entanglement dynamics of atoms in free space, cavities and ensembles."""

__version__ = "0.1.0"
