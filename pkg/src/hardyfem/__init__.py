"""Finite element approximation of the optimal Hardy constant."""
