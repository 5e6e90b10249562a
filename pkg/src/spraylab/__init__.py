"""Numerical spray geometry: jets, curvature, Hamel and Funk functions, projective deformations."""

__version__ = "0.1.0"
