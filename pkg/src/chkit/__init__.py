"""Executable reductions between consensus halving, Tucker-style labelling
problems and necklace splitting, over exact rationals."""

__version__ = "0.1.0"
